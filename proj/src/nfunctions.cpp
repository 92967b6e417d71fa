#include "orlicz/nfunctions.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "orlicz/csv_io.hpp"
#include "orlicz/detail/roots.hpp"
#include "orlicz/errors.hpp"

namespace orlicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxDepth = 30;
constexpr double kLinearCut = 1e2;  // above this, evaluate through the log channel

using Spline = boost::math::interpolators::pchip<std::vector<double>>;

// g_1..g_k at t = e^x together with their logs, and r0 = t/(1+t).
struct Chain {
  int k = 0;
  double r0 = 0;
  std::array<double, kMaxDepth + 1> g{};
  std::array<double, kMaxDepth + 1> lg{};
};

void fill_chain(double x, int k, Chain& c) {
  c.k = k;
  c.r0 = 1.0 / (1.0 + std::exp(-x));
  if (k < 1) return;
  c.g[1] = x > 35 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  c.lg[1] = std::log(c.g[1]);
  for (int i = 2; i <= k; ++i) {
    c.g[i] = std::log1p(c.g[i - 1]);
    c.lg[i] = std::log(c.g[i]);
  }
}

// Phi(t)/z^2 for ExpMinus with z = a t, small z.
double expm_series2(double z) {
  double term = 0.5, sum = 0.5;
  for (int k = 3; k < 40; ++k) {
    term *= z / k;
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

// ((z-1)e^z + 1)/z^2 as a series.
double expm_num_series2(double z) {
  double fact = 2.0, zp = 1.0, sum = 0.5;
  for (int k = 3; k < 40; ++k) {
    fact *= k;
    zp *= z;
    double term = zp * (k - 1) / fact;
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::PowerLaw: return "power";
    case Family::ExpMinus: return "expminus";
    case Family::LogProduct: return "logproduct";
    case Family::Tabulated: return "tabulated";
  }
  return "?";
}

double iterated_log(int k, double t) {
  if (k < 0) throw DomainError("iterated_log: negative index");
  if (!(t >= 0)) throw DomainError("iterated_log: t must be >= 0");
  for (int i = 0; i < k; ++i) t = std::log1p(t);
  return t;
}

double iterated_log_inverse(int k, double y) {
  if (k < 0) throw DomainError("iterated_log_inverse: negative index");
  if (!(y >= 0) || std::isinf(y)) throw DomainError("iterated_log_inverse: y must be finite and >= 0");
  for (int i = 0; i < k; ++i) {
    double next = std::expm1(y);
    if (std::isinf(next)) {
      // y is finite: e^y - 1 overflows, so log G is approximately y at this stage
      throw OverflowError("iterated_log_inverse: overflow after " + std::to_string(i) + " of " +
                              std::to_string(k) + " exponentials",
                          y, true);
    }
    y = next;
  }
  return y;
}

double log_iterated_log_of_exp(int k, double x) {
  if (k == 0) return x;
  Chain c;
  if (k > kMaxDepth) throw DomainError("iterated log depth too large");
  fill_chain(x, k, c);
  return c.lg[k];
}

struct NFunction::Impl {
  Family family = Family::PowerLaw;
  std::vector<double> params;
  bool asymptotic_only = false;
  double floor = 1.0;
  std::vector<double> tab_t, tab_phi;
  std::shared_ptr<Spline> spline;
  double lx_lo = -700, lx_hi = 1e300, ly_lo = -kInf, ly_hi = kInf;

  double lphi(double x) const;
  double el(double x) const;
};

double NFunction::Impl::lphi(double x) const {
  switch (family) {
    case Family::PowerLaw: {
      double p = params[0];
      return p * x - std::log(p);
    }
    case Family::ExpMinus: {
      double a = params[0];
      double lz = std::log(a) + x;
      double z = std::exp(lz);
      if (z < 0.5) return 2 * lz + std::log(expm_series2(z));
      if (z <= 700) return std::log(std::expm1(z) - z);
      return z + std::log1p(-(1 + z) * std::exp(-z));
    }
    case Family::LogProduct: {
      Chain c;
      int k = static_cast<int>(params.size()) - 1;
      fill_chain(x, k, c);
      double s = params[0] * x;
      for (int i = 1; i <= k; ++i)
        if (params[i] != 0) s += params[i] * c.lg[i];
      return s;
    }
    case Family::Tabulated:
      if (x < lx_lo - 1e-12 || x > lx_hi + 1e-12)
        throw RangeError("tabulated: t=" + fmt(std::exp(x)) + " outside sampled range");
      return (*spline)(std::clamp(x, lx_lo, lx_hi));
  }
  return 0;
}

double NFunction::Impl::el(double x) const {
  switch (family) {
    case Family::PowerLaw: return params[0] - 1;
    case Family::ExpMinus: {
      double z = params[0] * std::exp(x);
      if (z < 0.5) return expm_num_series2(z) / expm_series2(z);
      if (z <= 1) {
        double e = std::expm1(z);
        return ((z - 1) * e + z) / (e - z);
      }
      if (z > 700) return z - 1;
      double em = std::exp(-z);
      return ((z - 1) + em) / (1 - (1 + z) * em);
    }
    case Family::LogProduct: {
      Chain c;
      int k = static_cast<int>(params.size()) - 1;
      fill_chain(x, k, c);
      double s = params[0] - 1;
      double prod = 1;
      for (int j = 1; j <= k; ++j) {
        if (params[j] != 0) s += params[j] * c.r0 / (prod * c.g[j]);
        prod *= 1 + c.g[j];
      }
      return s;
    }
    case Family::Tabulated:
      if (x < lx_lo - 1e-12 || x > lx_hi + 1e-12)
        throw RangeError("tabulated: t=" + fmt(std::exp(x)) + " outside sampled range");
      return spline->prime(std::clamp(x, lx_lo, lx_hi)) - 1;
  }
  return 0;
}

NFunction::NFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

NFunction NFunction::power_law(double p) {
  if (!(p > 1) || !std::isfinite(p)) throw DomainError("PowerLaw needs finite p > 1");
  auto im = std::make_shared<Impl>();
  im->family = Family::PowerLaw;
  im->params = {p};
  return NFunction(im);
}

NFunction NFunction::exp_minus(double a) {
  if (!(a > 0) || !std::isfinite(a)) throw DomainError("ExpMinus needs finite a > 0");
  auto im = std::make_shared<Impl>();
  im->family = Family::ExpMinus;
  im->params = {a};
  im->lx_hi = std::log(1e307 / a);
  return NFunction(im);
}

NFunction NFunction::log_product(std::vector<double> p) {
  if (p.empty()) throw DomainError("LogProduct needs at least p0");
  if (static_cast<int>(p.size()) > kMaxDepth + 1) throw DomainError("LogProduct: too many factors");
  for (double v : p)
    if (!std::isfinite(v)) throw DomainError("LogProduct: non-finite exponent");
  if (p[0] < 1) throw DomainError("LogProduct needs p0 >= 1");
  bool asym = false;
  double first = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (first == 0 && p[i] != 0) first = p[i];
    if (p[i] != 0 && p[i] < 1) asym = true;
  }
  if (first < 0) throw DomainError("LogProduct: first non-vanishing p_i (i >= 1) must be positive");
  if (p[0] == 1 && first == 0) throw DomainError("LogProduct(1) is linear, not an N-function");
  auto im = std::make_shared<Impl>();
  im->family = Family::LogProduct;
  im->params = std::move(p);
  im->asymptotic_only = asym;
  return NFunction(im);
}

NFunction NFunction::slow_growth(int k, double p, int n) {
  if (k < 1) throw DomainError("SlowGrowth needs k >= 1");
  std::vector<double> e(1, 1.0);
  for (int i = 1; i < k; ++i) e.push_back(n);
  e.push_back(p);
  return log_product(std::move(e));
}

NFunction NFunction::tabulated(std::vector<double> t, std::vector<double> phi) {
  if (t.size() != phi.size() || t.size() < 4)
    throw DomainError("tabulated: need at least four (t, phi) pairs");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0) || !(phi[i] > 0) || !std::isfinite(t[i]) || !std::isfinite(phi[i]))
      throw DomainError("tabulated: samples must be positive and finite");
    if (i && (t[i] <= t[i - 1] || phi[i] <= phi[i - 1]))
      throw DomainError("tabulated: samples must be strictly increasing");
  }
  auto im = std::make_shared<Impl>();
  im->family = Family::Tabulated;
  std::vector<double> lx(t.size()), ly(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    lx[i] = std::log(t[i]);
    ly[i] = std::log(phi[i]);
  }
  im->lx_lo = lx.front();
  im->lx_hi = lx.back();
  im->ly_lo = ly.front();
  im->ly_hi = ly.back();
  im->spline = std::make_shared<Spline>(std::move(lx), std::move(ly));
  im->tab_t = std::move(t);
  im->tab_phi = std::move(phi);
  return NFunction(im);
}

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError("bad number '" + item + "' in descriptor");
    out.push_back(v);
  }
  return out;
}

NFunction from_family(const std::string& fam, const std::vector<double>& v) {
  auto need = [&](std::size_t n) {
    if (v.size() != n) throw ConfigError("descriptor '" + fam + "' expects " + std::to_string(n) + " parameter(s)");
  };
  if (fam == "power" || fam == "powerlaw") {
    need(1);
    return NFunction::power_law(v[0]);
  }
  if (fam == "expminus" || fam == "exp") {
    need(1);
    return NFunction::exp_minus(v[0]);
  }
  if (fam == "logproduct" || fam == "log") return NFunction::log_product(v);
  if (fam == "slowgrowth" || fam == "slow") {
    need(3);
    return NFunction::slow_growth(static_cast<int>(v[0]), v[1], static_cast<int>(v[2]));
  }
  throw ConfigError("unknown N-function family '" + fam + "'");
}

NFunction tabulated_from_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  std::size_t ct = t.column("t"), cp = t.column("phi");
  std::vector<double> ts, ps;
  for (auto& r : t.rows) {
    ts.push_back(r[ct]);
    ps.push_back(r[cp]);
  }
  return NFunction::tabulated(std::move(ts), std::move(ps));
}

}  // namespace

NFunction NFunction::parse(const std::string& d) {
  auto colon = d.find(':');
  if (colon == std::string::npos) throw ConfigError("descriptor '" + d + "' lacks ':'");
  std::string fam = d.substr(0, colon), rest = d.substr(colon + 1);
  try {
    if (fam == "tabulated") return tabulated_from_csv(rest);
    return from_family(fam, parse_list(rest));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid N-function '") + d + "': " + e.what());
  }
}

NFunction NFunction::from_json(const nlohmann::json& j) {
  try {
    if (j.is_string()) return parse(j.get<std::string>());
    if (j.contains("descriptor")) return parse(j.at("descriptor").get<std::string>());
    std::string fam = j.at("family").get<std::string>();
    NFunction f = [&] {
      if (fam == "tabulated") {
        if (j.contains("file")) return tabulated_from_csv(j.at("file").get<std::string>());
        return tabulated(j.at("t").get<std::vector<double>>(), j.at("phi").get<std::vector<double>>());
      }
      return from_family(fam, j.at("params").get<std::vector<double>>());
    }();
    if (j.contains("asymptotic_floor")) f = f.with_asymptotic_floor(j.at("asymptotic_floor").get<double>());
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad N-function JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid N-function: ") + e.what());
  }
}

nlohmann::json NFunction::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(impl_->family);
  if (impl_->family == Family::Tabulated) {
    j["t"] = impl_->tab_t;
    j["phi"] = impl_->tab_phi;
  } else {
    j["params"] = impl_->params;
  }
  if (impl_->asymptotic_only) j["asymptotic_only"] = true;
  j["asymptotic_floor"] = impl_->floor;
  return j;
}

std::string NFunction::describe() const {
  switch (impl_->family) {
    case Family::PowerLaw: return "PowerLaw(" + fmt(impl_->params[0]) + ")";
    case Family::ExpMinus: return "ExpMinus(" + fmt(impl_->params[0]) + ")";
    case Family::LogProduct: {
      std::string s = "LogProduct(";
      for (std::size_t i = 0; i < impl_->params.size(); ++i) s += (i ? "," : "") + fmt(impl_->params[i]);
      return s + ")";
    }
    case Family::Tabulated: return "Tabulated(" + std::to_string(impl_->tab_t.size()) + " samples)";
  }
  return "?";
}

Family NFunction::family() const { return impl_->family; }
const std::vector<double>& NFunction::params() const { return impl_->params; }
bool NFunction::asymptotic_only() const { return impl_->asymptotic_only; }
double NFunction::asymptotic_floor() const { return impl_->floor; }

NFunction NFunction::with_asymptotic_floor(double t) const {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError("asymptotic_floor must be positive");
  auto im = std::make_shared<Impl>(*impl_);
  im->floor = t;
  return NFunction(im);
}

double NFunction::log_x_min() const { return impl_->lx_lo; }
double NFunction::log_x_max() const { return impl_->lx_hi; }

double NFunction::log_eval(double x) const { return impl_->lphi(x); }
double NFunction::elasticity_m1(double x) const { return impl_->el(x); }

double NFunction::log_ratio(double x) const {
  const auto& p = impl_->params;
  switch (impl_->family) {
    case Family::PowerLaw: return (p[0] - 1) * x - std::log(p[0]);
    case Family::LogProduct: {
      Chain c;
      int k = static_cast<int>(p.size()) - 1;
      fill_chain(x, k, c);
      double s = (p[0] - 1) * x;
      for (int i = 1; i <= k; ++i)
        if (p[i] != 0) s += p[i] * c.lg[i];
      return s;
    }
    default: return impl_->lphi(x) - x;
  }
}

double NFunction::log_derivative(double x) const {
  return log_ratio(x) + std::log1p(impl_->el(x));
}

double NFunction::eval(double t) const {
  if (!(t >= 0)) throw DomainError("eval: t must be >= 0");
  if (t == 0) return 0;
  const auto& p = impl_->params;
  switch (impl_->family) {
    case Family::PowerLaw:
      if (t <= kLinearCut) return std::pow(t, p[0]) / p[0];
      break;
    case Family::ExpMinus: {
      double z = p[0] * t;
      if (z < 0.5) return z * z * expm_series2(z);
      if (z <= 700) return std::expm1(z) - z;
      break;
    }
    case Family::LogProduct:
      if (t <= kLinearCut) {
        double v = std::pow(t, p[0]), g = t;
        for (std::size_t i = 1; i < p.size(); ++i) {
          g = std::log1p(g);
          if (p[i] != 0) v *= std::pow(g, p[i]);
        }
        return v;
      }
      break;
    case Family::Tabulated:
      break;
  }
  return std::exp(impl_->lphi(std::log(t)));
}

double NFunction::derivative(double t) const {
  if (!(t >= 0)) throw DomainError("derivative: t must be >= 0");
  const auto& p = impl_->params;
  switch (impl_->family) {
    case Family::PowerLaw: return std::pow(t, p[0] - 1);
    case Family::ExpMinus: return p[0] * std::expm1(p[0] * t);
    default:
      if (t == 0) {
        if (impl_->family == Family::Tabulated) throw RangeError("tabulated: derivative at 0");
        return 0;
      }
      return std::exp(log_derivative(std::log(t)));
  }
}

double NFunction::log_eval_inverse(double ly) const {
  if (std::isnan(ly)) throw DomainError("eval_inverse: NaN");
  if (impl_->family == Family::PowerLaw) {
    double p = impl_->params[0];
    return (ly + std::log(p)) / p;
  }
  if (impl_->family == Family::Tabulated && (ly < impl_->ly_lo - 1e-12 || ly > impl_->ly_hi + 1e-12))
    throw RangeError("tabulated: value outside sampled range");
  double guess = impl_->family == Family::Tabulated ? 0.5 * (impl_->lx_lo + impl_->lx_hi) : 0.0;
  return detail::solve_increasing([&](double x) { return impl_->lphi(x) - ly; }, guess, 1.0,
                                  impl_->lx_lo, impl_->lx_hi, 1e-16, "eval_inverse");
}

double NFunction::eval_inverse(double y) const {
  if (!std::isfinite(y) || y < 0) throw DomainError("eval_inverse: y must be finite and >= 0");
  if (y == 0) return 0;
  if (impl_->family == Family::PowerLaw) {
    double p = impl_->params[0];
    return std::pow(p * y, 1 / p);
  }
  return std::exp(log_eval_inverse(std::log(y)));
}

double NFunction::log_ratio_ll(double xi) const {
  const auto& p = impl_->params;
  if (impl_->family == Family::LogProduct) {
    int k = static_cast<int>(p.size()) - 1;
    if (xi < 700) {
      double x = std::exp(xi);
      Chain c;
      fill_chain(x, k, c);
      double s = (p[0] - 1) * x;
      for (int i = 1; i <= k; ++i)
        if (p[i] != 0) s += p[i] * c.lg[i];
      return s;
    }
    if (p[0] != 1) return kInf;
    // t = exp(exp(xi)): g_1 = e^xi and g_2 = xi to double precision
    double s = 0, g = 0;
    for (int i = 1; i <= k; ++i) {
      double lg;
      if (i == 1) {
        lg = xi;
      } else if (i == 2) {
        g = xi;
        lg = std::log(g);
      } else {
        g = std::log1p(g);
        lg = std::log(g);
      }
      if (p[i] != 0) s += p[i] * lg;
    }
    return s;
  }
  if (xi >= 700) return kInf;
  double x = std::exp(xi);
  if (x > impl_->lx_hi) return kInf;
  if (impl_->family == Family::Tabulated && x < impl_->lx_lo) return kInf;
  if (impl_->family == Family::PowerLaw) return (p[0] - 1) * x - std::log(p[0]);
  return impl_->lphi(x) - x;
}

nlohmann::json ValidityReport::to_json() const {
  return {{"zero_at_origin", zero_at_origin},
          {"sublinear_at_zero", sublinear_at_zero},
          {"superlinear_at_infinity", superlinear_at_infinity},
          {"convex", convex},
          {"ratio_monotone", ratio_monotone},
          {"inconclusive", inconclusive},
          {"pass", pass},
          {"note", note}};
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0) || !(hi >= lo) || count == 0) throw DomainError("log_grid: need 0 < lo <= hi, count > 0");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> default_validation_grid() { return log_grid(1e-6, 1e6, 97); }

ValidityReport validate_nfunction(const NFunction& phi, const std::vector<double>& grid) {
  ValidityReport r;
  std::vector<double> g;
  for (double t : grid)
    if (t > 0 && std::isfinite(t)) g.push_back(t);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (g.size() < 8 || g.front() > 1e-6 * (1 + 1e-9) || g.back() < 1e6 * (1 - 1e-9)) {
    r.inconclusive = true;
    r.note = "grid must contain at least 8 points spanning [1e-6, 1e6]";
  }
  try {
    r.zero_at_origin = phi.eval(0) == 0;
  } catch (const Error&) {
    r.zero_at_origin = phi.family() == Family::Tabulated;  // Phi(0)=0 is implied for samples
  }
  std::vector<double> lx(g.size()), lphi(g.size()), lr(g.size());
  try {
    for (std::size_t i = 0; i < g.size(); ++i) {
      lx[i] = std::log(g[i]);
      lphi[i] = phi.log_eval(lx[i]);
      lr[i] = lphi[i] - lx[i];
    }
  } catch (const RangeError& e) {
    r.inconclusive = true;
    r.note = std::string("grid leaves the represented range: ") + e.what();
    return r;
  }
  if (g.size() < 3) return r;

  r.ratio_monotone = true;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (lr[i] < lr[i - 1] - 1e-12 * (1 + std::fabs(lr[i]))) r.ratio_monotone = false;

  // index of the point closest to t = 1
  std::size_t mid = 0;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (std::fabs(lx[i]) < std::fabs(lx[mid])) mid = i;
  std::size_t lo_dec = 0, hi_dec = g.size() - 1;
  while (lo_dec + 1 < g.size() && lx[lo_dec + 1] < lx[0] + std::log(10.0)) ++lo_dec;
  while (hi_dec > 0 && lx[hi_dec - 1] > lx.back() - std::log(10.0)) --hi_dec;
  const double ln2 = std::log(2.0);
  r.sublinear_at_zero = lr[mid] - lr[0] >= ln2 && lr[lo_dec] > lr[0];
  r.superlinear_at_infinity = lr.back() - lr[mid] >= ln2 && lr.back() > lr[hi_dec];

  // slopes of the chords must not decrease; compared as logs to survive overflow
  r.convex = true;
  double prev = -kInf;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    double d = lphi[i + 1] - lphi[i];
    if (!(d > 0)) {
      r.convex = false;
      break;
    }
    double ls = lphi[i] + std::log(std::expm1(d)) - std::log(g[i + 1] - g[i]);
    if (ls < prev - 1e-9 * (1 + std::fabs(prev))) {
      r.convex = false;
      break;
    }
    prev = ls;
  }
  r.pass = !r.inconclusive && r.zero_at_origin && r.sublinear_at_zero &&
           r.superlinear_at_infinity && r.convex && r.ratio_monotone;
  if (phi.asymptotic_only() && r.note.empty()) r.note = "asymptotic-only instance";
  return r;
}

}  // namespace orlicz
