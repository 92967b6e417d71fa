#include "orlicz/orlicz_measure.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "orlicz/csv_io.hpp"
#include "orlicz/errors.hpp"
#include "orlicz/kernels.hpp"

namespace orlicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier summation for the invariant checks
template <class F>
double accurate_sum(std::size_t n, F term) {
  double s = 0, c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = term(i), t = s + x;
    c += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

double log_modular(const LogYoung& lphi, const SampledDensity& F, double lb) {
  const auto& v = F.values();
  std::vector<double> terms(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    terms[i] = v[i] > 0 ? std::exp(lphi(std::log(v[i]) - lb)) : 0.0;
  double m = kernels::weighted_sum(F.weights(), terms);
  return m > 0 ? std::log(m) : -kInf;
}

// inverse: log Phi^{-1}(e^ly), used for the starting bracket when available
double norm_impl(const LogYoung& lphi, const std::function<double(double)>* inverse,
                 const SampledDensity& F) {
  const auto& v = F.values();
  const auto& w = F.weights();
  double vmax = *std::max_element(v.begin(), v.end());
  if (vmax == 0) return 0;
  auto g = [&](double lb) { return log_modular(lphi, F, lb); };
  double lo, hi;
  if (inverse) {
    lo = -kInf;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] > 0) lo = std::max(lo, std::log(v[i]) - (*inverse)(-std::log(w[i])));
    hi = std::log(vmax) - (*inverse)(0.0);
  } else {
    lo = hi = std::log(F.mass());
  }
  // the modular is >= 1 at lo and <= 1 at hi; widen when rounding says otherwise
  for (int k = 0; !(g(lo) >= 0); ++k) {
    if (k > 200) throw EvaluationError("luxemburg_norm: no lower bracket", lo);
    lo -= 1 + k;
  }
  for (int k = 0; !(g(hi) <= 0); ++k) {
    if (k > 200) throw EvaluationError("luxemburg_norm: no upper bracket", hi);
    hi += 1 + k;
  }
  double glo = g(lo), ghi = g(hi);
  if (glo == 0) return std::exp(lo);
  if (ghi == 0) return std::exp(hi);
  if (!std::isfinite(glo) || !std::isfinite(ghi))
    throw EvaluationError("luxemburg_norm: modular not finite on the bracket", lo);
  std::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                             boost::math::tools::eps_tolerance<double>(52), it);
  return std::exp(0.5 * (r.first + r.second));
}

LogYoung log_young(const NFunction& phi) {
  return [phi](double x) { return phi.log_eval(x); };
}

}  // namespace

// ---------------------------------------------------------------- density

SampledDensity::SampledDensity(std::vector<double> values, std::vector<double> weights,
                               bool normalized)
    : F_(std::move(values)), w_(std::move(weights)), normalized_(normalized) {
  if (F_.empty()) throw DataError("density has no samples");
  if (F_.size() != w_.size()) throw DataError("density: values and weights differ in length");
  for (std::size_t i = 0; i < F_.size(); ++i) {
    if (!std::isfinite(F_[i]) || F_[i] < 0)
      throw DataError("density value " + std::to_string(i) + " is negative or not finite");
    if (!std::isfinite(w_[i]) || !(w_[i] > 0))
      throw DataError("density weight " + std::to_string(i) + " is not positive");
  }
  double sw = accurate_sum(w_.size(), [&](std::size_t i) { return w_[i]; });
  if (std::fabs(sw - 1) > 1e-12)
    throw DataError("density weights sum to " + format_number(sw) + ", not 1");
  if (normalized_) {
    double m = accurate_sum(F_.size(), [&](std::size_t i) { return w_[i] * F_[i]; });
    if (std::fabs(m - 1) > 1e-12) throw DataError("normalized density has mass " + format_number(m));
  }
}

SampledDensity SampledDensity::uniform(std::vector<double> values, bool normalized) {
  std::vector<double> w(values.size(), values.empty() ? 0.0 : 1.0 / double(values.size()));
  return SampledDensity(std::move(values), std::move(w), normalized);
}

SampledDensity SampledDensity::from_csv(const std::string& path, bool normalized) {
  auto t = read_csv(path);
  auto iv = t.column("value"), iw = t.column("weight");
  std::vector<double> v, w;
  for (const auto& row : t.rows) {
    v.push_back(row.at(iv));
    w.push_back(row.at(iw));
  }
  return SampledDensity(std::move(v), std::move(w), normalized);
}

double SampledDensity::mass() const { return kernels::weighted_sum(w_, F_); }

double SampledDensity::measure(const std::vector<std::uint8_t>& mask) const {
  if (mask.size() != F_.size()) throw DataError("mask length differs from the density");
  std::vector<double> ones(F_.size(), 1.0);
  return kernels::masked_weighted_sum(w_, ones, mask);
}

double SampledDensity::masked_mass(const std::vector<std::uint8_t>& mask) const {
  if (mask.size() != F_.size()) throw DataError("mask length differs from the density");
  return kernels::masked_weighted_sum(w_, F_, mask);
}

SampledDensity SampledDensity::scaled(double c) const {
  if (!(c >= 0) || !std::isfinite(c)) throw DataError("scale factor must be finite and >= 0");
  std::vector<double> v(F_);
  for (double& x : v) x *= c;
  return SampledDensity(std::move(v), w_, normalized_ && c == 1);
}

std::string SampledDensity::to_csv() const {
  std::vector<std::vector<double>> rows;
  rows.reserve(F_.size());
  for (std::size_t i = 0; i < F_.size(); ++i) rows.push_back({F_[i], w_[i]});
  return orlicz::to_csv({"value", "weight"}, rows);
}

void SampledDensity::write_csv(const std::string& path) const { write_text_atomic(path, to_csv()); }

// ---------------------------------------------------------------- norms

double modular(const LogYoung& log_phi, const SampledDensity& F, double b) {
  if (!(b > 0)) throw DomainError("modular needs b > 0");
  return std::exp(log_modular(log_phi, F, std::log(b)));
}

double modular(const NFunction& phi, const SampledDensity& F, double b) {
  return modular(log_young(phi), F, b);
}

double luxemburg_norm(const LogYoung& log_phi, const SampledDensity& F) {
  return norm_impl(log_phi, nullptr, F);
}

double luxemburg_norm(const NFunction& phi, const SampledDensity& F) {
  std::function<double(double)> inv = [&phi](double ly) { return phi.log_eval_inverse(ly); };
  return norm_impl(log_young(phi), &inv, F);
}

double luxemburg_norm_conjugate(const ConjugatePair& pair, const SampledDensity& F) {
  std::function<double(double)> inv = [&pair](double ly) { return pair.log_conjugate_inverse(ly); };
  return norm_impl([&pair](double x) { return pair.log_conjugate(x); }, &inv, F);
}

nlohmann::json ModularBound::to_json() const {
  return {{"modular", modular}, {"norm", norm}, {"holds", holds}};
}

ModularBound norm_from_modular(const NFunction& phi, const SampledDensity& F) {
  ModularBound r;
  r.modular = modular(phi, F);
  if (!std::isfinite(r.modular) || r.modular < 1)
    throw PreconditionError("norm_from_modular needs a finite modular >= 1, got " +
                            format_number(r.modular));
  r.norm = luxemburg_norm(phi, F);
  r.holds = r.norm <= r.modular * (1 + 1e-12);
  return r;
}

nlohmann::json YoungSplit::to_json() const {
  return {{"epsilon", epsilon}, {"norm", norm},     {"measure", measure},
          {"bound", bound},     {"actual", actual}, {"holds", holds}};
}

YoungSplit youngsplit_bound(const ConjugatePair& pair, const SampledDensity& F,
                            const std::vector<std::uint8_t>& mask, double epsilon) {
  if (!(epsilon > 0)) throw DomainError("youngsplit_bound needs epsilon > 0");
  YoungSplit r;
  r.epsilon = epsilon;
  r.norm = luxemburg_norm(pair.phi(), F);
  r.measure = F.measure(mask);
  r.actual = F.masked_mass(mask);
  double c = r.measure > 0 ? std::exp(pair.log_conjugate(-std::log(epsilon))) * r.measure : 0.0;
  r.bound = epsilon * r.norm * (1 + c);
  r.holds = r.actual <= r.bound + 1e-9;
  return r;
}

YoungSplit youngsplit_optimal(const ConjugatePair& pair, const SampledDensity& F,
                              const std::vector<std::uint8_t>& mask) {
  double mu = F.measure(mask);
  if (mu == 0) {
    // the bound tends to 0 with epsilon
    YoungSplit r;
    r.norm = luxemburg_norm(pair.phi(), F);
    r.holds = true;
    return r;
  }
  double lmu = std::log(mu);
  // log of the bound without the norm factor
  auto f = [&](double le) {
    double lc = pair.log_conjugate(-le) + lmu;
    return le + (lc > 0 ? lc + std::log1p(std::exp(-lc)) : std::log1p(std::exp(lc)));
  };
  double best = 0, fbest = kInf;
  for (double le = -30; le <= 30; le += 0.25) {
    double v = f(le);
    if (v < fbest) {
      fbest = v;
      best = le;
    }
  }
  std::uintmax_t it = 200;
  auto m = boost::math::tools::brent_find_minima(f, best - 0.25, best + 0.25, 52, it);
  return youngsplit_bound(pair, F, mask, std::exp(m.first));
}

double worst_tail_mass(const SampledDensity& F, double m) {
  if (!(m >= 0)) throw DomainError("worst_tail_mass needs m >= 0");
  const auto& v = F.values();
  const auto& w = F.weights();
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  double left = m, s = 0;
  for (std::size_t i : idx) {
    if (left <= 0) break;
    double take = std::min(left, w[i]);
    s += take * v[i];
    left -= take;
  }
  return s;
}

std::vector<TailPoint> tail_bound_curve(const ConjugatePair& pair, const SampledDensity& F,
                                        const std::vector<double>& s_grid, double C,
                                        double C_prime) {
  if (!F.normalized()) throw PreconditionError("tail_bound_curve needs a normalized density");
  if (!(C > 0) || !(C_prime > 0)) throw ConfigError("ledger constants must be positive");
  double norm = luxemburg_norm(pair.phi(), F);
  std::vector<TailPoint> out;
  for (double s : s_grid) {
    if (!(s > 0)) throw DomainError("tail_bound_curve needs s > 0");
    TailPoint p;
    p.s = s;
    p.level_measure = std::min(1.0, C_prime / s);
    // epsilon = 1 / (Phi*)^{-1}(s) and mu <= C'/s turn the split into this
    p.bound = C * norm * (1 + C_prime) * std::exp(-pair.log_conjugate_inverse(std::log(s)));
    p.actual = worst_tail_mass(F, p.level_measure);
    out.push_back(p);
  }
  return out;
}

std::string tail_curve_csv(const std::vector<TailPoint>& curve) {
  std::vector<std::vector<double>> rows;
  for (const auto& p : curve) rows.push_back({p.s, p.level_measure, p.bound, p.actual});
  return to_csv({"s", "level_measure", "bound", "actual"}, rows);
}

// ---------------------------------------------------------------- generators

nlohmann::json DensitySpec::to_json() const {
  return {{"kind", kind}, {"gamma", gamma}, {"grid", grid}, {"dim", dim}, {"seed", seed}};
}

DensitySpec DensitySpec::from_json(const nlohmann::json& j) {
  DensitySpec s;
  s.kind = j.value("kind", s.kind);
  s.gamma = j.value("gamma", s.gamma);
  s.grid = j.value("grid", s.grid);
  s.dim = j.value("dim", s.dim);
  s.seed = j.value("seed", s.seed);
  return s;
}

DensitySpec DensitySpec::parse(const std::string& d) {
  auto colon = d.find(':');
  DensitySpec s;
  s.kind = d.substr(0, colon);
  std::vector<double> a;
  if (colon != std::string::npos) {
    std::stringstream ss(d.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        a.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("bad number '" + tok + "' in density descriptor " + d);
      }
    }
  }
  std::size_t k = 0;
  if (k < a.size()) s.gamma = a[k++];
  if (s.kind == "random" && k < a.size()) s.seed = static_cast<unsigned>(a[k++]);
  if (k < a.size()) s.grid = static_cast<int>(a[k++]);
  if (k < a.size()) s.dim = static_cast<int>(a[k++]);
  if (k < a.size()) throw ConfigError("too many fields in density descriptor " + d);
  return s;
}

SampledDensity generate_density(const DensitySpec& spec) {
  if (spec.grid < 1 || spec.dim < 1) throw ConfigError("density grid and dim must be positive");
  double N = std::pow(double(spec.grid), spec.dim);
  if (N > double(1 << 24)) throw ConfigError("density grid too large: grid^dim > 2^24");
  std::size_t n = static_cast<std::size_t>(N);
  std::vector<double> w(n, 1.0 / double(n)), v(n);
  const double g = spec.gamma;
  const std::string& k = spec.kind;

  if (k == "constant") {
    if (!(g >= 0)) throw ConfigError("constant density needs a value >= 0");
    std::fill(v.begin(), v.end(), g);
    return SampledDensity(std::move(v), std::move(w), g == 1);
  }
  if (k == "single-spike") {
    if (!(g > 0 && g < 1)) throw ConfigError("single-spike needs 0 < delta0 < 1");
    std::fill(v.begin(), v.end(), 1 - g);
    v[0] += g * double(n);
  } else if (k == "random") {
    if (!(g >= 0)) throw ConfigError("random density needs sigma >= 0");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> z;
    for (double& x : v) x = std::exp(g * z(rng));
  } else if (k == "power-spike" || k == "log-spike") {
    if (k == "power-spike" && !(g >= 0 && g < spec.dim))
      throw ConfigError("power-spike needs 0 <= gamma < dim for an integrable density");
    if (k == "log-spike" && !(g > 0)) throw ConfigError("log-spike needs gamma > 0");
    const int m = spec.grid;
    std::vector<int> j(spec.dim, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = 0;
      for (int a = 0; a < spec.dim; ++a) {
        // cell centres sit half a cell away from the singular corner
        double x = (j[a] - m / 2 + 0.5) / m;
        x -= std::round(x);
        r2 += x * x;
      }
      double r = std::sqrt(r2);
      v[i] = k == "power-spike" ? std::pow(r, -g) : std::pow(std::log1p(1 / r), g);
      for (int a = 0; a < spec.dim && ++j[a] == m; ++a) j[a] = 0;
    }
  } else {
    throw ConfigError("unknown density kind: " + k);
  }
  double mass = accurate_sum(n, [&](std::size_t i) { return w[i] * v[i]; });
  for (double& x : v) x /= mass;
  return SampledDensity(std::move(v), std::move(w), true);
}

SampledDensity load_density(const std::string& d) {
  if (d.rfind("csv:", 0) == 0) return SampledDensity::from_csv(d.substr(4));
  return generate_density(DensitySpec::parse(d));
}

bool power_spike_in_Lp(double p, double gamma, int dim) { return p * gamma < dim; }

nlohmann::json RefinementVerdict::to_json() const {
  return {{"norms", norms}, {"last_ratio", last_ratio}, {"bounded", bounded}};
}

RefinementVerdict norm_under_refinement(const NFunction& phi, DensitySpec spec,
                                        double growth_factor) {
  RefinementVerdict r;
  for (int i = 0; i < 3; ++i) {
    r.norms.push_back(luxemburg_norm(phi, generate_density(spec)));
    spec.grid *= 2;
  }
  r.last_ratio = r.norms[2] / r.norms[1];
  r.bounded = r.last_ratio <= growth_factor;
  return r;
}

}  // namespace orlicz
