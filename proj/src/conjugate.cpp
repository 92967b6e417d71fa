#include "orlicz/conjugate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "orlicz/detail/roots.hpp"
#include "orlicz/errors.hpp"
#include "orlicz/kernels.hpp"

namespace orlicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dual_index(double p) { return p / (p - 1); }

// (1+u)log(1+u) - u
double expminus_conj(double u) {
  if (u < 0.1) {
    double sum = 0, up = u;
    for (int k = 2; k < 40; ++k) {
      up *= u;  // u^k
      double term = up / (k * (k - 1.0));
      sum += (k % 2 == 0) ? term : -term;
      if (term < 1e-18 * sum) break;
    }
    return sum;
  }
  return (1 + u) * std::log1p(u) - u;
}

double log_expminus_conj(double lu) {
  if (lu < std::log(0.1)) {
    double u = std::exp(lu);
    double sum = 0, up = 1;
    for (int k = 2; k < 40; ++k) {
      double term = up / (k * (k - 1.0));
      sum += (k % 2 == 0) ? term : -term;
      up *= u;
      if (up < 1e-18) break;
    }
    return 2 * lu + std::log(sum);
  }
  if (lu < 690) return std::log(expminus_conj(std::exp(lu)));
  return lu + std::log(lu - 1);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

const char* provenance_name(Provenance p) {
  return p == Provenance::ClosedForm ? "closed-form" : "numeric";
}

ConjugatePair::ConjugatePair(NFunction phi) : phi_(std::move(phi)) {
  if (phi_.asymptotic_only())
    throw PreconditionError("conjugation needs a convex N-function; " + phi_.describe() +
                            " is asymptotic-only");
  try {
    tau0_ = h(1.0);
    x_tau0_sigma_ = x_of_log_sigma(std::log(tau0_));
    log_hstar_tau0_ = log_hstar_param(x_tau0_sigma_);
    x_zero_ = x_of_tau(0.0);
    log_sigma_zero_ = log_sigma_param(x_zero_);
    h_zero_ = std::exp(phi_.log_derivative(x_zero_));
    have_anchor_ = true;
  } catch (const Error& e) {
    anchor_error_ = e.what();
  }
}

void ConjugatePair::require_anchor() const {
  if (!have_anchor_)
    throw RangeError("h* anchors unavailable for " + phi_.describe() + ": " + anchor_error_);
}

double ConjugatePair::tau_param(double x) const {
  return phi_.log_eval(x) + std::log(phi_.elasticity_m1(x));
}

double ConjugatePair::log_sigma_param(double x) const {
  return phi_.log_ratio(x) + std::log(phi_.elasticity_m1(x));
}

namespace {

template <class F>
double solve_x(const NFunction& phi, F&& f, double guess) {
  return detail::solve_increasing(std::forward<F>(f), guess, 1.0, phi.log_x_min(), phi.log_x_max(),
                                  1e-16, "conjugate");
}

}  // namespace

double ConjugatePair::x_of_log_slope(double ls) const {
  const auto& p = phi_.params();
  switch (phi_.family()) {
    case Family::PowerLaw: return ls / (p[0] - 1);
    case Family::ExpMinus: {
      double a = p[0], lu = ls - std::log(a);
      double l1p = lu > 36 ? lu + std::log1p(std::exp(-lu)) : std::log1p(std::exp(lu));
      return std::log(l1p) - std::log(a);
    }
    default:
      return solve_x(phi_, [&](double x) { return phi_.log_derivative(x) - ls; }, 0.0);
  }
}

double ConjugatePair::x_of_tau(double tau) const {
  if (phi_.family() == Family::PowerLaw) {
    double p = phi_.params()[0];
    return (tau + std::log(p) - std::log(p - 1)) / p;
  }
  return solve_x(phi_, [&](double x) { return tau_param(x) - tau; }, 0.0);
}

double ConjugatePair::x_of_log_sigma(double lsig) const {
  if (phi_.family() == Family::PowerLaw) {
    double p = phi_.params()[0];
    return (lsig + std::log(p) - std::log(p - 1)) / (p - 1);
  }
  return solve_x(phi_, [&](double x) { return log_sigma_param(x) - lsig; }, 0.0);
}

double ConjugatePair::conjugate(double s) const {
  if (!(s >= 0)) throw DomainError("conjugate: s must be >= 0");
  if (s == 0) return 0;
  const auto& p = phi_.params();
  switch (phi_.family()) {
    case Family::PowerLaw: {
      double q = dual_index(p[0]);
      double v = std::pow(s, q) / q;
      if (std::isinf(v)) throw OverflowError("conjugate overflows", log_conjugate(std::log(s)));
      return v;
    }
    case Family::ExpMinus: return expminus_conj(s / p[0]);
    default: return conjugate_numeric(s);
  }
}

double ConjugatePair::conjugate_numeric(double s) const {
  if (!(s >= 0)) throw DomainError("conjugate: s must be >= 0");
  if (s == 0) return 0;
  double ls = std::log(s);
  double x = solve_x(phi_, [&](double x) { return phi_.log_derivative(x) - ls; }, 0.0);
  double lc = tau_param(x);
  double v = std::exp(lc);
  if (std::isinf(v)) throw OverflowError("conjugate overflows", lc);
  return v;
}

double ConjugatePair::log_conjugate(double ls) const {
  const auto& p = phi_.params();
  switch (phi_.family()) {
    case Family::PowerLaw: {
      double q = dual_index(p[0]);
      return q * ls - std::log(q);
    }
    case Family::ExpMinus: return log_expminus_conj(ls - std::log(p[0]));
    default: return tau_param(x_of_log_slope(ls));
  }
}

double ConjugatePair::maximizer(double s) const {
  if (!(s >= 0)) throw DomainError("maximizer: s must be >= 0");
  if (s == 0) return 0;
  return std::exp(x_of_log_slope(std::log(s)));
}

double ConjugatePair::log_conjugate_inverse(double ly) const {
  if (phi_.family() == Family::PowerLaw) {
    double q = dual_index(phi_.params()[0]);
    return (ly + std::log(q)) / q;
  }
  return phi_.log_derivative(x_of_tau(ly));
}

double ConjugatePair::conjugate_inverse(double y) const {
  if (!std::isfinite(y) || y < 0) throw DomainError("conjugate_inverse: y must be finite and >= 0");
  if (y == 0) return 0;
  if (phi_.family() == Family::PowerLaw) {
    double q = dual_index(phi_.params()[0]);
    return std::pow(q * y, 1 / q);
  }
  return std::exp(log_conjugate_inverse(std::log(y)));
}

double ConjugatePair::log_h(double t) const {
  if (!std::isfinite(t)) throw DomainError("h: t must be finite");
  return log_conjugate_inverse(t);
}

double ConjugatePair::h(double t) const {
  double l = log_h(t);
  double v = std::exp(l);
  if (std::isinf(v)) throw OverflowError("h overflows", l);
  return v;
}

double ConjugatePair::log_h_prime(double t) const {
  if (phi_.family() == Family::PowerLaw) return log_h(t) - std::log(dual_index(phi_.params()[0]));
  return t - x_of_tau(t);
}

double ConjugatePair::h_inverse(double y) const {
  if (!(y > 0)) throw DomainError("h_inverse: y must be > 0");
  return log_conjugate(std::log(y));
}

double ConjugatePair::tau0() const {
  require_anchor();
  return tau0_;
}

double ConjugatePair::h_at_zero() const {
  require_anchor();
  return h_zero_;
}

double ConjugatePair::log_hstar_param(double x) const {
  double el = phi_.elasticity_m1(x);
  double gap = tau_param(x) - (1 + el) / el;
  if (!(gap > 0)) return -kInf;
  return log_sigma_param(x) + std::log(gap);
}

double ConjugatePair::hstar(double sigma) const {
  if (std::isnan(sigma)) throw DomainError("hstar: NaN");
  require_anchor();
  if (sigma <= 0 || std::log(sigma) <= log_sigma_zero_) return -h_zero_;
  double x = x_of_log_sigma(std::log(sigma));
  double el = phi_.elasticity_m1(x);
  return sigma * (tau_param(x) - (1 + el) / el);
}

double ConjugatePair::hstar_at_tau0() const {
  require_anchor();
  return std::exp(log_hstar_tau0_);
}

double ConjugatePair::log_hstar_inverse(double ly) const {
  require_anchor();
  if (std::isnan(ly)) throw DomainError("hstar_inverse: NaN");
  if (!(ly > log_hstar_tau0_))
    throw DomainError("(h*)^{-1}(y) needs y > h*(tau0) = " + num(std::exp(log_hstar_tau0_)) +
                          " with tau0 = h(1) = " + num(tau0_) + "; got y = " + num(std::exp(ly)),
                      std::exp(log_hstar_tau0_));
  double x = detail::solve_increasing([&](double x) { return log_hstar_param(x) - ly; },
                                      x_tau0_sigma_, 1.0, x_tau0_sigma_, phi_.log_x_max(), 1e-15,
                                      "hstar_inverse");
  return log_sigma_param(x);
}

double ConjugatePair::hstar_inverse(double y) const {
  if (!(y > 0) || !std::isfinite(y))
    throw DomainError("hstar_inverse: y must be positive and finite", hstar_at_tau0());
  return std::exp(log_hstar_inverse(std::log(y)));
}

Provenance ConjugatePair::conjugate_provenance() const {
  auto f = phi_.family();
  return (f == Family::PowerLaw || f == Family::ExpMinus) ? Provenance::ClosedForm
                                                          : Provenance::Numeric;
}

Provenance ConjugatePair::h_provenance() const {
  return phi_.family() == Family::PowerLaw ? Provenance::ClosedForm : Provenance::Numeric;
}

nlohmann::json ConjugatePair::provenance_json() const {
  return {{"phi", phi_.family() == Family::Tabulated ? "interpolated" : "closed-form"},
          {"phi_star", provenance_name(conjugate_provenance())},
          {"phi_inverse", phi_.family() == Family::PowerLaw ? "closed-form" : "numeric"},
          {"phi_star_inverse", provenance_name(h_provenance())},
          {"h", provenance_name(h_provenance())},
          {"h_star", "numeric"},
          {"h_star_inverse", "numeric"}};
}

std::optional<std::vector<double>> ConjugatePair::h_growth_exponents() const {
  if (phi_.family() != Family::LogProduct) return std::nullopt;
  const auto& p = phi_.params();
  if (p[0] != 1 || p.size() < 2) return std::nullopt;
  return std::vector<double>(p.begin() + 1, p.end());
}

double conjugate_at(const NFunction& phi, double s) { return ConjugatePair(phi).conjugate(s); }
double h_at(const ConjugatePair& pair, double t) { return pair.h(t); }
double hstar_at(const ConjugatePair& pair, double s) { return pair.hstar(s); }
double hstar_inverse_at(const ConjugatePair& pair, double y) { return pair.hstar_inverse(y); }

double legendre_sup(const std::function<double(double)>& f, double s, double lo, double hi,
                    std::size_t grid) {
  if (!(hi > lo) || grid < 3) throw DomainError("legendre_sup: empty interval");
  std::vector<double> t(grid), c(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    t[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
    c[i] = f(t[i]);
  }
  auto best = kernels::affine_max(t, c, s);
  std::size_t i = best.index;
  double a = t[i == 0 ? 0 : i - 1], b = t[i + 1 < grid ? i + 1 : grid - 1];
  auto r = boost::math::tools::brent_find_minima([&](double u) { return -(s * u - f(u)); }, a, b, 52);
  return std::max(best.value, -r.second);
}

Biconjugate::Biconjugate(const ConjugatePair& pair, double lo, double hi, std::size_t count)
    : pair_(&pair), s_(count), c_(count) {
  for (std::size_t i = 0; i < count; ++i) {
    double ls = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    s_[i] = std::exp(ls);
    try {
      c_[i] = pair.conjugate(s_[i]);
    } catch (const OverflowError&) {
      c_[i] = kInf;
    }
  }
}

double Biconjugate::operator()(double t) const {
  auto best = kernels::affine_max(s_, c_, t);
  std::size_t i = best.index, n = s_.size();
  double a = s_[i == 0 ? 0 : i - 1], b = s_[i + 1 < n ? i + 1 : n - 1];
  // in log s: brent's absolute tolerance would swamp slopes below ~1e-8
  auto obj = [&](double ls) {
    double s = std::exp(ls);
    try {
      return -(t * s - pair_->conjugate(s));
    } catch (const OverflowError&) {
      return kInf;
    }
  };
  auto r = boost::math::tools::brent_find_minima(obj, std::log(a), std::log(b), 52);
  return std::max(best.value, -r.second);
}

YoungMargin check_young(const ConjugatePair& pair, double s, double t) {
  if (!(s >= 0) || !(t >= 0)) throw DomainError("check_young: s, t must be >= 0");
  double phi = pair.phi().eval(t);
  double cs;
  try {
    cs = pair.conjugate(s);
  } catch (const OverflowError&) {
    cs = kInf;
  }
  double m = phi + cs - s * t;
  if (std::isinf(phi) || std::isinf(cs)) m = kInf;
  return {m, m >= -1e-9 * (1 + s * t)};
}

ProductRatio check_universal_product(const ConjugatePair& pair, double t) {
  if (!(t > 0)) throw DomainError("check_universal_product: t must be > 0");
  double lt = std::log(t);
  double l = pair.phi().log_eval_inverse(lt) + pair.log_conjugate_inverse(lt) - lt;
  double r = std::exp(l);
  return {r, r > 1 && r <= 2 + 1e-9};
}

OrderVerdict check_conjugate_order(const NFunction& phi1, const NFunction& phi2,
                                   const std::vector<double>& grid) {
  OrderVerdict v;
  ConjugatePair c1(phi1), c2(phi2);
  v.worst_conjugate_gap = kInf;
  v.worst_h_gap = kInf;
  for (double t : grid) {
    double x = std::log(t);
    double l1 = phi1.log_eval(x), l2 = phi2.log_eval(x);
    if (l1 > l2 + 1e-12 * (1 + std::fabs(l2))) v.precondition = false;
    // image point s = Phi2'(t): Phi2's maximizer lies on the grid
    double ls = phi2.log_derivative(x);
    double a = c1.log_conjugate(ls), b = c2.log_conjugate(ls);
    v.worst_conjugate_gap = std::min(v.worst_conjugate_gap, a - b);
    if (a < b - 1e-9 * (1 + std::fabs(b))) v.conjugate_order = false;
    // tau with h2(tau) = s
    double tau = b;
    double h1 = c1.log_h(tau);
    v.worst_h_gap = std::min(v.worst_h_gap, ls - h1);
    if (h1 > ls + 1e-9 * (1 + std::fabs(ls))) v.h_order = false;
  }
  return v;
}

}  // namespace orlicz
