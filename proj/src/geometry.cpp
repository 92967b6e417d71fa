#include "orlicz/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "orlicz/conjugate.hpp"
#include "orlicz/csv_io.hpp"
#include "orlicz/detail/roots.hpp"
#include "orlicz/errors.hpp"

namespace orlicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLsMin = -50;

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

std::string join_params(const std::vector<double>& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + format_number(p[i]);
  return s;
}

std::string descriptor_of(const NFunction& f) {
  switch (f.family()) {
    case Family::PowerLaw: return "power:" + format_number(f.params()[0]);
    case Family::ExpMinus: return "expminus:" + format_number(f.params()[0]);
    case Family::LogProduct: return "logproduct:" + join_params(f.params());
    case Family::Tabulated: return f.describe();
  }
  return f.describe();
}

// log(Phi/t) that tolerates evaluation failures
double safe_log_ratio(const NFunction& f, double x) {
  try {
    return f.log_ratio(x);
  } catch (const Error&) {
    return kNaN;
  }
}

double safe_log_ratio_ll(const NFunction& f, double xi) {
  try {
    return f.log_ratio_ll(xi);
  } catch (const Error&) {
    return kNaN;
  }
}

// Bertrand rule on exponents a_j of prod g_j^{-a_j}
bool bertrand_converges(const std::vector<double>& a) {
  for (double v : a) {
    if (std::fabs(v - 1) > 1e-12) return v > 1;
  }
  return false;
}

bool is_n(double v, int n) { return std::fabs(v - n) < 1e-12; }

// p - p1 when both are LogProducts, so log(Phi/Phi1) is summed termwise
std::optional<std::vector<double>> exponent_gap(const NFunction& f, const NFunction& f1) {
  if (f.family() != Family::LogProduct || f1.family() != Family::LogProduct) return std::nullopt;
  const auto& a = f.params();
  const auto& b = f1.params();
  std::vector<double> d(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) d[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) d[i] -= b[i];
  return d;
}

double termwise(const std::vector<double>& d, double x) {
  double s = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] != 0) s += d[i] * log_iterated_log_of_exp(static_cast<int>(i), x);
  return s;
}

}  // namespace

// ---------------------------------------------------------------- ledger

nlohmann::json GeometryLedger::to_json() const {
  return {{"A", A}, {"K", K}, {"L", L}, {"C", C}};
}

GeometryLedger GeometryLedger::from_json(const nlohmann::json& j) {
  GeometryLedger g;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_number()) throw ConfigError("ledger value for " + it.key() + " is not a number");
    double v = it->get<double>();
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError("ledger value for " + it.key() + " must be positive");
    if (it.key() == "A") g.A = v;
    else if (it.key() == "K") g.K = v;
    else if (it.key() == "L") g.L = v;
    else if (it.key() == "C") g.C = v;
    else throw ConfigError("unknown geometry ledger key: " + it.key());
  }
  return g;
}

nlohmann::json GeometryInputs::to_json() const {
  return {{"phi", phi.describe()}, {"phi1", phi1.describe()}, {"n", n},
          {"ell", ell},            {"q", q},                  {"q_prime", q_prime},
          {"ledger", ledger.to_json()}};
}

int log_depth(const NFunction& phi) {
  if (phi.family() != Family::LogProduct) return 0;
  return static_cast<int>(phi.params().size()) - 1;
}

NFunction witness_phi1(int n, int ell, double q) {
  if (n < 2) throw ConfigError("dimension n must be at least 2");
  if (ell < 0) throw ConfigError("ell must be non-negative");
  if (!(q > n)) throw ConfigError("q must exceed n");
  std::vector<double> p(1, 1.0);
  for (int i = 0; i < ell; ++i) p.push_back(n);
  p.push_back(q);
  return NFunction::log_product(p);
}

GeometryInputs make_geometry_inputs(const NFunction& phi, int n, std::optional<int> ell,
                                    std::optional<double> q, double q_prime) {
  int l = ell.value_or(log_depth(phi) + 2);
  double qq = q.value_or(2.0 * n);
  return GeometryInputs{phi, witness_phi1(n, l, qq), n, l, qq, q_prime, {}};
}

double phi2_of(const NFunction& phi, const NFunction& phi1, double s) {
  double floor = std::exp(phi1.log_ratio(0.0));
  if (!(s >= floor * (1 - 1e-15)))
    throw DomainError("phi2_of: s below Phi1(1) = " + format_number(floor), floor);
  double ls = std::log(s);
  double x = detail::solve_increasing([&](double x) { return phi1.log_ratio(x) - ls; }, 1.0, 1.0,
                                      0.0, 1e300, 1e-15, "phi2_of");
  return std::exp(phi.log_ratio(x));
}

double log_g_ll(int i, double xi) {
  if (i == 0) return std::exp(xi);
  if (xi < 700) return log_iterated_log_of_exp(i, std::exp(xi));
  if (i == 1) return xi;
  double g = xi;
  for (int j = 2; j < i; ++j) g = std::log1p(g);
  return std::log(g);
}

// ---------------------------------------------------------------- E

EFunction::EFunction(NFunction phi, NFunction phi1, int n)
    : phi_(std::move(phi)), phi1_(std::move(phi1)), n_(n) {
  if (n_ < 2) throw ConfigError("dimension n must be at least 2");
  auto gap = exponent_gap(phi_, phi1_);
  auto lin = [f = phi_, f1 = phi1_, gap](double x, double& A, double& B) {
    A = safe_log_ratio(f1, x);
    B = gap ? termwise(*gap, x) : safe_log_ratio(f, x) - A;
  };
  auto by_xi = [lin](double xi, double& A, double& B) { lin(std::exp(xi), A, B); };
  auto by_zeta = [f = phi_, f1 = phi1_, gap](double z, double& A, double& B) {
    double xi = std::exp(z);
    A = safe_log_ratio_ll(f1, xi);
    if (gap) {
      B = 0;
      for (std::size_t i = 0; i < gap->size(); ++i)
        if ((*gap)[i] != 0) B += (*gap)[i] * log_g_ll(static_cast<int>(i), xi);
    } else {
      B = safe_log_ratio_ll(f, xi) - A;
    }
  };
  std::vector<SupSegment> segs;
  segs.push_back({-40.0, 2.0, 0.05, lin});
  segs.push_back({std::log(2.0), 6.0, 1.0 / 64, by_xi});
  segs.push_back({std::log(6.0), 690.0, 1.0 / 16, by_zeta});
  phi2_star_ = std::make_shared<ParametricSup>(std::move(segs));
}

double EFunction::log_E1(double x) const {
  x = std::max(x, 0.0);
  return (x - phi1_.log_ratio(x)) / (n_ - 1);
}

double EFunction::dual_gap(double x, double ls) const {
  return phi2_star_->log_sup(n_ * ls) - ls - x;
}

// G(a) < 0 <= G(b); returns the lower end of the final bracket
double EFunction::refine_E2(double x, double a, double fa, double b, double fb) const {
  auto G = [&](double ls) { return dual_gap(x, ls); };
  detail::RelTol tol{1e-13};
  // wide or infinite brackets are first narrowed in asinh(ls)
  while ((!std::isfinite(fa) || !std::isfinite(fb) || b - a > 1 + std::fabs(a)) && !tol(a, b)) {
    double m = std::sinh(0.5 * (std::asinh(a) + std::asinh(b)));
    if (!(m > a && m < b)) m = 0.5 * (a + b);
    double fm = G(m);
    if (fm >= 0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  if (tol(a, b) || fb == 0) return a;
  std::uintmax_t iters = 200;
  // the lower end keeps G < 0, so Phi2*(E2^n) <= t E2 holds at the returned point
  auto r = boost::math::tools::toms748_solve(G, a, b, fa, fb, tol, iters);
  return r.first;
}

// E2 below a point b with G(b) >= 0. Steps double in asinh(ls), which keeps
// the search short when E1 is astronomically larger than E2.
double EFunction::E2_below(double x, double b, double fb) const {
  const double wmin = std::asinh(kLsMin);
  double wb = std::asinh(b);
  for (double step = 0.5;; step *= 2) {
    double wa = std::max(wb - step, wmin);
    double a = wa == wmin ? kLsMin : std::sinh(wa);
    double fa = dual_gap(x, a);
    if (fa < 0) return refine_E2(x, a, fa, b, fb);
    if (wa == wmin) return kLsMin;
    b = a;
    fb = fa;
    wb = wa;
  }
}

double EFunction::log_E2(double x) const {
  x = std::max(x, 0.0);
  double a = log_E1(x), fa = dual_gap(x, a);
  if (fa >= 0) return E2_below(x, a, fa);
  const double top = 2 * x + 700, wtop = std::asinh(top);
  double wa = std::asinh(a);
  for (double step = 0.5;; step *= 2) {
    double wb = std::min(wa + step, wtop);
    double b = wb == wtop ? top : std::sinh(wb), fb = dual_gap(x, b);
    if (fb >= 0) return refine_E2(x, a, fa, b, fb);
    if (wb == wtop) return kInf;
    a = b;
    fa = fb;
    wa = wb;
  }
}

double EFunction::log_E(double x) const {
  x = std::max(x, 0.0);
  double l1 = log_E1(x), g = dual_gap(x, l1);
  if (g < 0) return l1;  // E2 > E1
  return E2_below(x, l1, g);
}

double EFunction::log_E_ll(double xi) const {
  if (xi >= 709) return kInf;
  return log_E(std::exp(xi));
}

double EFunction::E1(double t) const { return std::exp(log_E1(std::log(std::max(t, 1.0)))); }
double EFunction::E2(double t) const { return std::exp(log_E2(std::log(std::max(t, 1.0)))); }
double EFunction::E(double t) const { return std::exp(log_E(std::log(std::max(t, 1.0)))); }

double EFunction::phi2_star(double y) const {
  if (!(y > 0)) return 0;
  return std::exp(phi2_star_->log_sup(std::log(y)));
}

namespace {
using Spline = boost::math::interpolators::pchip<std::vector<double>>;
constexpr double kSplitU = 8;
}  // namespace

LogETable::LogETable(std::shared_ptr<const EFunction> E, double xi_max)
    : E_(std::move(E)), xi_max_(std::min(xi_max, 700.0)) {
  if (!(xi_max_ > std::log(kSplitU) + 0.5)) throw ConfigError("LogETable: xi_max too small");
  std::vector<double> x, y;
  for (double u = 0; u < kSplitU - 1e-12; u += 0.125) {
    x.push_back(u);
    y.push_back(E_->log_E(u));
  }
  for (double z = std::log(kSplitU);; z += 0.125) {
    z = std::min(z, xi_max_);
    x.push_back(std::exp(z));
    y.push_back(E_->log_E(x.back()));
    if (z >= xi_max_) break;
  }
  x_max_ = x.back();
  spline_ = std::make_shared<Spline>(std::move(x), std::move(y));
}

double LogETable::operator()(double x) const {
  x = std::max(x, 0.0);
  if (x > x_max_) return E_->log_E(x);
  return (*static_cast<const Spline*>(spline_.get()))(x);
}

double LogETable::ll(double xi) const {
  if (xi >= 709) return kInf;
  return (*this)(std::exp(xi));
}

// ---------------------------------------------------------------- checks

const char* check_verdict_name(CheckVerdict v) {
  switch (v) {
    case CheckVerdict::Holds: return "Holds";
    case CheckVerdict::Fails: return "Fails";
    case CheckVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

nlohmann::json GrowthReport::to_json() const {
  nlohmann::json j{{"L", L},   {"L_small", L_small},  {"t1", t1},
                   {"t2", t2}, {"verdict", check_verdict_name(verdict)}, {"note", note}};
  j["bound"] = bound ? nlohmann::json(*bound) : nlohmann::json(nullptr);
  return j;
}

GrowthReport check_growth_L(const NFunction& phi, const std::vector<double>& grid_in) {
  GrowthReport r;
  if (phi.family() == Family::Tabulated) {
    r.note = "tabulated input";
    return r;
  }
  auto grid = grid_in.empty() ? log_grid(1, 1e8, 33) : grid_in;
  for (double t : grid)
    if (!(t >= 1)) throw DomainError("check_growth_L: grid points must be >= 1", 1);
  double tmax = *std::max_element(grid.begin(), grid.end());
  double split = std::sqrt(tmax);
  double lL = -kInf, lS = -kInf;
  for (double a : grid) {
    for (double b : grid) {
      double xa = std::log(a), xb = std::log(b);
      double v = phi.log_ratio(xa + xb) - log_add(phi.log_ratio(xa), phi.log_ratio(xb));
      if (v > lL) {
        lL = v;
        r.t1 = a;
        r.t2 = b;
      }
      if (a <= split && b <= split) lS = std::max(lS, v);
    }
  }
  r.L = std::exp(lL);
  r.L_small = std::exp(lS);
  const auto& p = phi.params();
  if (phi.family() == Family::LogProduct && p[0] == 1) {
    double s = 0;
    for (std::size_t i = 1; i < p.size(); ++i) s += p[i];
    r.bound = std::pow(4.0, s);
  }
  if (!std::isfinite(lL) || lL - lS > std::log(10.0)) {
    r.verdict = CheckVerdict::Fails;
    r.note = "ratio grows with the grid";
  } else if (r.bound && r.L > *r.bound) {
    r.verdict = CheckVerdict::Fails;
    r.note = "ratio exceeds 4^{sum q}";
  } else {
    r.verdict = CheckVerdict::Holds;
  }
  return r;
}

nlohmann::json LemmaEReport::to_json() const {
  return {{"C", C}, {"worst_t", worst_t}, {"finite", finite}};
}

LemmaEReport check_lemma_E_bound(const EFunction& E, const std::vector<double>& grid_in) {
  auto grid = grid_in.empty() ? log_grid(1, 1e8, 41) : grid_in;
  LemmaEReport r;
  double worst = -kInf;
  for (double t : grid) {
    double x = std::log(std::max(t, 1.0));
    double lE = E.log_E(x);
    double v = E.phi1().log_eval(E.n() * lE) - lE - x;
    if (v > worst) {
      worst = v;
      r.worst_t = t;
    }
  }
  r.C = std::exp(worst);
  r.finite = std::isfinite(r.C);
  return r;
}

nlohmann::json ComparisonReport::to_json() const {
  return {{"worst_log_first", worst_first},
          {"worst_log_second", worst_second},
          {"worst_log_dual", worst_dual},
          {"pass", pass}};
}

ComparisonReport check_comparisons(const EFunction& E, const std::vector<double>& grid,
                                   double rel_tol) {
  ComparisonReport r;
  const auto& f1 = E.phi1();
  double r1 = f1.log_ratio(0.0);
  for (double t : grid) {
    if (!(t >= 1)) throw DomainError("check_comparisons: grid points must be >= 1", 1);
    double x = std::log(t);
    double lE = E.log_E(x);
    double lr = f1.log_ratio(x);
    r.worst_first = std::max(r.worst_first, (E.n() - 1) * lE - x + lr);
    r.worst_second = std::max(r.worst_second, r1 - lr);
    r.worst_dual = std::max(r.worst_dual, E.log_phi2_star(E.n() * lE) - x - lE);
  }
  double lim = std::log1p(rel_tol);
  r.pass = r.worst_first <= lim && r.worst_second <= lim && r.worst_dual <= lim;
  return r;
}

IntegrabilityReport green_integrability(const std::function<double(double)>& log_E,
                                        std::optional<TailModel> model, double tol) {
  Integrand f;
  f.log_f = [log_E](double u) { return -u - log_E(u); };
  f.log_reach = 700;
  QuadratureOptions o;
  o.tol = tol;
  o.condition = ConditionId::GreenE;
  o.model = std::move(model);
  try {
    return TailIntegral(std::move(f), 1.0, o).report();
  } catch (const Error& e) {
    IntegrabilityReport r;
    r.condition = ConditionId::GreenE;
    r.lower_limit = 1;
    r.evidence = std::string("evaluation failed: ") + e.what();
    return r;
  }
}

IntegrabilityReport green_integrability(const EFunction& E, std::optional<TailModel> model,
                                        double tol) {
  LogETable table(std::shared_ptr<const EFunction>(&E, [](const EFunction*) {}),
                  std::log(700.0) + 0.25);
  return green_integrability([&table](double u) { return table(u); }, std::move(model), tol);
}

// ---------------------------------------------------------------- closed forms

double ExponentRecord::log_E_closed(double x) const {
  double s = 0;
  for (std::size_t i = 0; i < E.size(); ++i)
    if (E[i] != 0) s += E[i] * log_iterated_log_of_exp(static_cast<int>(i), x);
  return s;
}

double ExponentRecord::log_E_closed_ll(double xi) const {
  double s = 0;
  for (std::size_t i = 0; i < E.size(); ++i)
    if (E[i] != 0) s += E[i] * log_g_ll(static_cast<int>(i), xi);
  return s;
}

nlohmann::json ExponentRecord::to_json() const {
  nlohmann::json j{{"subcase", subcase}, {"n", n},   {"p", p},   {"ell", ell},
                   {"q", q},             {"q_prime", q_prime},   {"E1", E1},
                   {"E2", E2},           {"E", E},   {"composition", composition},
                   {"green_model", green_model.exponents},       {"green_converges", green_converges}};
  j["exp_t_exponent"] = std::isfinite(exp_t_exponent) ? nlohmann::json(exp_t_exponent)
                                                       : nlohmann::json(nullptr);
  return j;
}

ExponentRecord closed_form_exponents(const std::string& d, int n, const std::vector<double>& p,
                                     int ell, double q, double qp) {
  if (n < 2) throw ConfigError("dimension n must be at least 2");
  if (ell < 0) throw ConfigError("ell must be non-negative");
  if (!(q > n)) throw ConfigError("q must exceed n");
  ExponentRecord r;
  r.subcase = d;
  r.n = n;
  r.p = p;
  r.ell = ell;
  r.q = q;
  r.q_prime = qp;
  r.exp_t_exponent = kNaN;
  double m = n - 1.0;
  r.E1.assign(ell + 2, -n / m);
  r.E1[0] = 1 / m;
  r.E1[ell + 1] = -q / m;

  if (d == "poly") {
    r.E2 = r.E1;
    r.E = r.E1;
    r.composition.assign(ell + 2, 2.0 * n);
    r.composition[0] = n;
    r.composition[ell + 1] = n * qp + q;
  } else if (d == "slow-k1") {
    if (p.size() != 1 || !(p[0] > n)) throw ConfigError("slow-k1 needs p = {p} with p > n");
    if (ell < 1) throw ConfigError("slow-k1 needs ell >= 1");
    double P = p[0], D = P * n - P + n;
    r.E2.assign(ell + 1, -P * n / D);
    r.E2[0] = (P - n) / D;
    r.E2[ell] = -P * q / D;
    r.E = r.E2;
    double c = P / (P - n);
    r.composition.assign(ell + 2, 2 * n * c);
    r.composition[0] = n * c;
    r.composition[ell] = (n + q) * c;
    r.composition[ell + 1] = q * qp * c;
  } else if (d == "slow-2.1" || d == "slow-2.2" || d == "slow-2.3") {
    int k = static_cast<int>(p.size()) - 1;
    if (k < 2 || p[0] != 1 || !is_n(p[1], n))
      throw ConfigError(d + " needs p = {1, n, p2, ..., pk} with k >= 2");
    int j0 = 0;
    for (int i = 2; i <= k; ++i) {
      if (p[i] < n - 1e-12) throw ConfigError(d + " needs every p_i >= n");
      if (!j0 && !is_n(p[i], n)) j0 = i;
    }
    if (!j0) throw ConfigError(d + " needs some p_i > n");
    if (d == "slow-2.1" && k != 2) throw ConfigError("slow-2.1 needs k = 2");
    if (d == "slow-2.2" && (k < 3 || j0 != k))
      throw ConfigError("slow-2.2 needs k >= 3 and p_1 = ... = p_{k-1} = n");
    if (d == "slow-2.3" && (k < 3 || j0 >= k))
      throw ConfigError("slow-2.3 needs k >= 3 and p_{j0} > n for some j0 < k");
    if (ell < k) throw ConfigError(d + " needs ell >= k");
    r.E2.assign(ell + 1, -1.0);
    r.E2[0] = 0;
    for (int i = 1; i <= k - 1; ++i) r.E2[i] = (p[i + 1] - n) / n;
    r.E2[ell] = -q / n;
    r.E = r.E2;
    if (d == "slow-2.1" && p[2] > 2 * n) r.exp_t_exponent = n / (p[2] - 2.0 * n);
  } else {
    throw ConfigError("unsupported subcase descriptor: " + d);
  }
  r.green_model.exponents = r.E;
  r.green_model.exponents[0] += 1;
  r.green_model.source = "1/(t E) with E from " + d;
  r.green_converges = bertrand_converges(r.green_model.exponents);
  return r;
}

std::optional<ExponentRecord> recognize_subcase(const NFunction& phi, int n, int ell, double q,
                                                double qp) {
  const auto& p = phi.params();
  try {
    switch (phi.family()) {
      case Family::PowerLaw:
      case Family::ExpMinus: return closed_form_exponents("poly", n, p, ell, q, qp);
      case Family::Tabulated: return std::nullopt;
      case Family::LogProduct: break;
    }
    int k = static_cast<int>(p.size()) - 1;
    if (p[0] > 1) return closed_form_exponents("poly", n, p, ell, q, qp);
    if (k == 1 && p[1] > n) return closed_form_exponents("slow-k1", n, {p[1]}, ell, q, qp);
    if (k < 2 || !is_n(p[1], n)) return std::nullopt;
    int j0 = 0;
    for (int i = 2; i <= k; ++i) {
      if (p[i] < n - 1e-12) return std::nullopt;
      if (!j0 && !is_n(p[i], n)) j0 = i;
    }
    if (!j0 || ell < k) return std::nullopt;
    const char* d = k == 2 ? "slow-2.1" : (j0 == k ? "slow-2.2" : "slow-2.3");
    return closed_form_exponents(d, n, p, ell, q, qp);
  } catch (const ConfigError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------- feasibility

const char* feasibility_name(Feasibility f) {
  switch (f) {
    case Feasibility::Feasible: return "Feasible";
    case Feasibility::Infeasible: return "Infeasible";
    case Feasibility::Unknown: return "Unknown";
  }
  return "?";
}

nlohmann::json FeasibilityReport::to_json() const {
  nlohmann::json j{{"phi", phi},       {"n", n},           {"verdict", feasibility_name(verdict)},
                   {"symbolic", symbolic}, {"reason", reason}, {"checks", checks}};
  j["witness"] = witness ? nlohmann::json(*witness) : nlohmann::json(nullptr);
  return j;
}

FeasibilityReport diameter_feasible_symbolic(const NFunction& phi, int n) {
  if (phi.family() != Family::LogProduct)
    throw UnsupportedError("symbolic diameter criterion needs a LogProduct");
  if (n < 2) throw ConfigError("dimension n must be at least 2");
  const auto& p = phi.params();
  int k = static_cast<int>(p.size()) - 1;
  FeasibilityReport r;
  r.symbolic = true;
  r.phi = phi.describe();
  r.n = n;
  auto feasible = [&](std::string why) {
    r.verdict = Feasibility::Feasible;
    r.witness = descriptor_of(witness_phi1(n, k + 2, 2.0 * n));
    r.reason = std::move(why);
  };
  auto infeasible = [&](std::string why) {
    r.verdict = Feasibility::Infeasible;
    r.reason = std::move(why);
  };
  if (p[0] > 1) {
    feasible("p0 > 1: polynomial growth");
  } else if (k == 0 || p[1] < n - 1e-12) {
    infeasible("p1 < n: the first integrability condition fails for every smaller Phi1");
  } else if (!is_n(p[1], n)) {
    feasible("p1 > n");
  } else {
    int i = 2;
    while (i <= k && std::fabs(p[i] - 2.0 * n) < 1e-12) ++i;
    if (i > k)
      infeasible("p1 = n and p_i = 2n for all i >= 2: int dt/(t E) diverges");
    else if (p[i] > 2 * n)
      feasible("p1 = n and the first p_i != 2n (i = " + std::to_string(i) + ") exceeds 2n");
    else
      infeasible("p1 = n and the first p_i != 2n (i = " + std::to_string(i) +
                 ") is below 2n: int dt/(t E) diverges");
  }
  return r;
}

namespace {

// Phi/Phi1 sampled at t = exp(exp(xi)) must grow without a late decrease
bool sampled_c1(const NFunction& phi, const NFunction& phi1, nlohmann::json& out) {
  // the last samples reach log log log t = 690 for the slowest ratios
  const double xis[] = {0.5, 1, 2, 8, 32, 128, 690, std::exp(10.0), std::exp(100.0), std::exp(690.0)};
  auto gap = exponent_gap(phi, phi1);
  std::vector<double> d;
  for (double xi : xis) {
    if (gap) {
      double s = 0;
      for (std::size_t i = 0; i < gap->size(); ++i)
        if ((*gap)[i] != 0) s += (*gap)[i] * log_g_ll(static_cast<int>(i), xi);
      d.push_back(s);
      continue;
    }
    double a = safe_log_ratio_ll(phi, xi), b = safe_log_ratio_ll(phi1, xi);
    d.push_back(a == kInf && std::isfinite(b) ? kInf : a - b);
  }
  out = d;
  for (double v : d)
    if (std::isnan(v)) return false;
  std::size_t m = d.size();
  double early = std::max({d[0], d[1], d[2]});
  if (!std::isfinite(early)) return false;
  return d[m - 1] >= d[m - 2] && d[m - 2] >= d[m - 3] && d[m - 1] - early > std::log(10.0);
}

}  // namespace

FeasibilityReport witness_search(const NFunction& phi, int n, int budget) {
  FeasibilityReport r;
  r.phi = phi.describe();
  r.n = n;
  r.checks = nlohmann::json::array();
  if (phi.family() == Family::Tabulated) {
    r.reason = "tabulated input: no witness search";
    return r;
  }
  int k = log_depth(phi);
  const double qs[] = {n + 0.5, n + 1.0, 2.0 * n};
  for (int ell = k + 2; ell <= k + 1 + budget; ++ell) {
    for (double q : qs) {
      auto phi1 = witness_phi1(n, ell, q);
      nlohmann::json c{{"phi1", descriptor_of(phi1)}, {"ell", ell}, {"q", q}};
      bool ok = true;
      try {
        nlohmann::json samples;
        bool c1 = sampled_c1(phi, phi1, samples);
        c["C1"] = c1;
        c["C1_samples"] = samples;
        ok = c1;
        if (ok) {
          ConjugatePair pair1(phi1);
          auto ir = I_of(pair1, n);
          c["C2"] = verdict_name(ir.verdict);
          ok = ir.converges();
        }
        if (ok) {
          auto g = check_growth_L(phi1);
          c["C3"] = g.to_json();
          ok = g.verdict == CheckVerdict::Holds;
        }
        if (ok) {
          EFunction E(phi, phi1, n);
          auto rec = recognize_subcase(phi, n, ell, q);
          auto gr = green_integrability(E, rec ? std::optional<TailModel>(rec->green_model)
                                               : std::nullopt);
          c["green"] = verdict_name(gr.verdict);
          ok = gr.converges();
        }
      } catch (const Error& e) {
        c["error"] = e.what();
        ok = false;
      }
      r.checks.push_back(c);
      if (ok) {
        r.verdict = Feasibility::Feasible;
        r.witness = descriptor_of(phi1);
        r.reason = "witness passes C1-C3 and green integrability";
        return r;
      }
    }
  }
  r.reason = "search exhausted";
  return r;
}

FeasibilityReport diameter_feasible(const NFunction& phi, int n, int budget) {
  if (phi.family() == Family::LogProduct) return diameter_feasible_symbolic(phi, n);
  return witness_search(phi, n, budget);
}

// ---------------------------------------------------------------- pipeline

namespace {

double tilde_base(int ell, double qp, double x) {
  double s = 0;
  for (int i = 1; i <= ell; ++i) s += log_iterated_log_of_exp(i, x);
  return s + qp * log_iterated_log_of_exp(ell + 1, x);
}

double tilde_base_ll(int ell, double qp, double xi) {
  double s = 0;
  for (int i = 1; i <= ell; ++i) s += log_g_ll(i, xi);
  return s + qp * log_g_ll(ell + 1, xi);
}

}  // namespace

double GeometryBound::log_tilde_base(double x) const { return tilde_base(in_.ell, in_.q_prime, x); }

double GeometryBound::log_tilde_base_ll(double xi) const {
  return tilde_base_ll(in_.ell, in_.q_prime, xi);
}

double GeometryBound::log_E_tilde(double x) const {
  return std::log(tilde_scale_) + log_tilde_base(x);
}

GeometryBound::GeometryBound(GeometryInputs in) : in_(std::move(in)) {
  if (!(in_.q_prime > 1)) throw ConfigError("q' must exceed 1 for int dt/(t E_tilde) to converge");
  E_ = std::make_shared<EFunction>(in_.phi, in_.phi1, in_.n);
  table_ = std::make_shared<LogETable>(E_);
  closed_ = recognize_subcase(in_.phi, in_.n, in_.ell, in_.q, in_.q_prime);
  const LogETable* T = table_.get();
  green_ = green_integrability([T](double u) { return (*T)(u); },
                               closed_ ? std::optional<TailModel>(closed_->green_model)
                                       : std::nullopt);
  if (!green_.converges())
    throw PreconditionError(std::string("green integrability of E is ") +
                            verdict_name(green_.verdict) + " for " + in_.phi.describe());

  double worst = kInf;
  for (double x = 0; x <= 8.0; x += 0.25) worst = std::min(worst, (*T)(x) - log_tilde_base(x));
  for (double xi = std::log(8.0); xi <= 40.0; xi += 0.5)
    worst = std::min(worst, T->ll(xi) - log_tilde_base_ll(xi));
  tilde_scale_ = std::min(1.0, std::exp(worst));

  TailModel tm;
  tm.exponents.assign(in_.ell + 2, 1.0);
  tm.exponents[in_.ell + 1] = in_.q_prime;
  tm.source = "1/(t E_tilde)";
  green_tilde_ = green_integrability([this](double u) { return log_E_tilde(u); }, tm);
  if (!green_tilde_.converges())
    throw ConfigError("q' = " + format_number(in_.q_prime) +
                      ": int dt/(t E_tilde) does not converge");

  double lc = std::log(tilde_scale_);
  auto psi_lin = [T](double x, double& A, double& B) {
    A = x;
    B = (*T)(x);
  };
  auto psi_xi = [T](double xi, double& A, double& B) {
    A = std::exp(xi);
    B = T->ll(xi);
  };
  // no captured this: copies of the bound share these tables
  const int ell = in_.ell;
  const double qp = in_.q_prime;
  auto tpsi_lin = [T, lc, ell, qp](double x, double& A, double& B) {
    A = lc + tilde_base(ell, qp, x);
    B = (*T)(x) - A;
  };
  auto tpsi_xi = [T, lc, ell, qp](double xi, double& A, double& B) {
    A = lc + tilde_base_ll(ell, qp, xi);
    B = T->ll(xi) - A;
  };
  const double x0 = -40, x1 = 2, hx = 0.05, xi0 = std::log(2.0), xi1 = 690, hxi = 1.0 / 32;
  psi_star_ = std::make_shared<ParametricSup>(
      std::vector<SupSegment>{{x0, x1, hx, psi_lin}, {xi0, xi1, hxi, psi_xi}});
  tilde_psi_star_ = std::make_shared<ParametricSup>(
      std::vector<SupSegment>{{x0, x1, hx, tpsi_lin}, {xi0, xi1, hxi, tpsi_xi}});
}

double GeometryBound::tilde_psi(double u) const {
  if (!(u > 0)) throw DomainError("tilde_psi needs u > 0");
  double lu = std::log(u);
  double x = detail::solve_increasing([&](double x) { return log_E_tilde(x) - lu; }, 0.0, 1.0,
                                      -700.0, 1e300, 1e-15, "tilde_psi");
  return std::exp(E_->log_E(x));
}

double GeometryBound::log_composed(double ly) const {
  double w = tilde_psi_star_->log_sup(ly);
  if (w == -kInf) return -kInf;
  return psi_star_->log_sup(w);
}

double GeometryBound::log_volume(double r) const {
  if (!(r > 0)) throw DomainError("volume needs r > 0");
  double lc = log_composed(std::log(in_.ledger.C) - 2 * std::log(r));
  return std::min(0.0, -lc);
}

double GeometryBound::volume(double r) const { return std::exp(log_volume(r)); }

double GeometryBound::log_volume_closed(double r) const {
  if (!(r > 0)) throw DomainError("volume needs r > 0");
  if (!closed_ || closed_->composition.empty()) return kNaN;
  double ly = std::log(in_.ledger.C) - 2 * std::log(r);
  if (ly <= 0) return kNaN;
  double lc = 0;
  for (std::size_t i = 0; i < closed_->composition.size(); ++i)
    if (closed_->composition[i] != 0) lc += closed_->composition[i] * log_iterated_log_of_exp(int(i), ly);
  return -lc;
}

std::string GeometryBound::volume_csv(const std::vector<double>& rs) const {
  std::vector<std::vector<double>> rows;
  for (double r : rs) {
    double lv = log_volume(r);
    rows.push_back({r, std::exp(lv), lv, std::exp(log_volume_closed(r))});
  }
  return to_csv({"r", "v", "log_v", "v_closed"}, rows);
}

std::string GeometryBound::E_csv(const std::vector<double>& ts) const {
  std::vector<std::vector<double>> rows;
  for (double t : ts) {
    double x = std::log(std::max(t, 1.0));
    double ec = closed_ ? std::exp(closed_->log_E_closed(x)) : kNaN;
    rows.push_back({t, std::exp(E_->log_E(x)), ec});
  }
  return to_csv({"t", "E", "E_closed"}, rows);
}

nlohmann::json GeometryBound::to_json() const {
  nlohmann::json j{{"inputs", in_.to_json()},
                   {"green", green_.to_json()},
                   {"green_tilde", green_tilde_.to_json()},
                   {"tilde_scale", tilde_scale_}};
  j["closed_form"] = closed_ ? closed_->to_json() : nlohmann::json(nullptr);
  return j;
}

GeometryBound psi_pipeline(const GeometryInputs& in) { return GeometryBound(in); }

double volume_lower_bound(const GeometryBound& bound, double r) { return bound.volume(r); }

}  // namespace orlicz
