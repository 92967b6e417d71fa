#include "orlicz/asymptotics.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "orlicz/csv_io.hpp"
#include "orlicz/detail/roots.hpp"
#include "orlicz/errors.hpp"

namespace orlicz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double safe(const LogFn& f, double t) {
  try {
    return f(t);
  } catch (const Error&) {
    return kNaN;
  }
}

struct Scan {
  int k;
  double lmax;
  double growth;
  bool nan, growing;
};

Scan scan(const LogFn& f, const LogFn& g, const std::vector<double>& grid,
          const std::vector<double>& lf, int k, double lo, double hi, double limit) {
  double c2 = std::ldexp(1.0, k);
  Scan s{k, -std::numeric_limits<double>::infinity(), 0, false, false};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double r = lf[i] - safe(g, c2 * grid[i]);
    if (std::isnan(r)) s.nan = true;
    else s.lmax = std::max(s.lmax, r);
  }
  if (hi >= 100 * lo) {
    double r[3];
    for (int j = 0; j < 3; ++j) {
      double t = hi / std::pow(10.0, 2 - j);
      r[j] = safe(f, t) - safe(g, c2 * t);
    }
    if (r[2] == r[0]) s.growth = 0;  // also covers inf - inf
    else s.growth = r[2] - r[0];
    s.growing = r[2] >= r[1] && r[1] >= r[0] && s.growth >= limit;
  }
  return s;
}

// log g_j(t) for moderate t
double lg(int j, double t) { return std::log(iterated_log(j, t)); }

}  // namespace

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::Prec: return "prec";
    case Direction::NotPrec: return "not-prec";
    case Direction::Sim: return "sim";
    case Direction::Inconclusive: return "inconclusive";
  }
  return "?";
}

nlohmann::json ComparisonVerdict::to_json() const {
  nlohmann::json j{{"direction", direction_name(direction)},
                   {"C1", C1},
                   {"C2", C2},
                   {"range", {lo, hi}},
                   {"max_violation", max_violation},
                   {"note", note}};
  if (direction == Direction::Sim) {
    j["C1_rev"] = C1_rev;
    j["C2_rev"] = C2_rev;
  }
  return j;
}

ComparisonVerdict prec_check(const LogFn& f, const LogFn& g, double lo, double hi,
                             const CompareOptions& opt) {
  if (!(lo > 0) || !(hi > lo)) throw ConfigError("prec_check needs 0 < lo < hi");
  ComparisonVerdict v;
  v.lo = lo;
  v.hi = hi;
  auto grid = log_grid(lo, hi, std::max<std::size_t>(opt.count, 2));
  std::vector<double> lf(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) lf[i] = safe(f, grid[i]);

  const double lbudget = std::log(opt.budget);
  bool all_growing = true, have = false;
  Scan best{};
  for (int a = 0; a <= opt.scale_exponent; ++a) {
    for (int k : {a, -a}) {
      if (a == 0 && k < 0) continue;
      Scan s = scan(f, g, grid, lf, k, lo, hi, opt.growth_limit);
      all_growing = all_growing && s.growing && !s.nan;
      bool ok = !s.nan && !s.growing && std::isfinite(s.lmax) && s.lmax <= lbudget;
      if (ok && (!have || (std::abs(k) == std::abs(best.k) && s.lmax < best.lmax))) {
        best = s;
        have = true;
      }
    }
    if (have) break;  // smallest |log2 C2| wins
  }
  if (have) {
    v.direction = Direction::Prec;
    v.C1 = std::exp(best.lmax);
    v.C2 = std::ldexp(1.0, best.k);
    v.max_violation = best.growth;
  } else if (all_growing) {
    v.direction = Direction::NotPrec;
    v.note = "ratio grows over the top two decades for every C2";
  } else {
    v.direction = Direction::Inconclusive;
    v.note = "no C2 within budget, growth not established";
  }
  return v;
}

ComparisonVerdict sim_check(const LogFn& f, const LogFn& g, double lo, double hi,
                            const CompareOptions& opt) {
  auto fwd = prec_check(f, g, lo, hi, opt);
  auto bwd = prec_check(g, f, lo, hi, opt);
  ComparisonVerdict v = fwd;
  if (fwd.direction == Direction::Prec && bwd.direction == Direction::Prec) {
    v.direction = Direction::Sim;
    v.C1_rev = bwd.C1;
    v.C2_rev = bwd.C2;
    v.max_violation = std::max(fwd.max_violation, bwd.max_violation);
  }
  v.note = std::string("reverse: ") + direction_name(bwd.direction) +
           (fwd.note.empty() ? "" : "; " + fwd.note);
  return v;
}

double numeric_log_conjugate(const NFunction& phi, double log_s) {
  double x = detail::solve_increasing([&](double x) { return phi.log_derivative(x) - log_s; }, 0.0,
                                      1.0, phi.log_x_min(), phi.log_x_max(), 1e-15, "conjugate");
  return phi.log_eval(x) + std::log(phi.elasticity_m1(x));
}

double numeric_log_h(const NFunction& phi, double t) {
  auto tau = [&](double x) { return phi.log_eval(x) + std::log(phi.elasticity_m1(x)); };
  double x = detail::solve_increasing([&](double x) { return tau(x) - t; }, 0.0, 1.0,
                                      phi.log_x_min(), phi.log_x_max(), 1e-15, "h");
  return phi.log_derivative(x);
}

// ---------------------------------------------------------------- suite

nlohmann::json SuiteItem::to_json() const {
  return {{"name", name},
          {"description", description},
          {"range", {lo, hi}},
          {"verdict", verdict.to_json()},
          {"max_abs_log_ratio", std::isnan(max_abs_log_ratio) ? nlohmann::json(nullptr)
                                                              : nlohmann::json(max_abs_log_ratio)},
          {"tolerance", tolerance},
          {"pass", pass}};
}

std::string SuiteItem::curve_csv() const { return to_csv({"t", "log_f", "log_g"}, curve); }

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json j{{"all_pass", all_pass}, {"seconds", seconds}};
  j["items"] = nlohmann::json::array();
  for (const auto& it : items) j["items"].push_back(it.to_json());
  return j;
}

namespace {

SuiteItem run_item(std::string name, std::string description, const LogFn& f, const LogFn& g,
                   double lo, double hi, double tol) {
  SuiteItem it;
  it.name = std::move(name);
  it.description = std::move(description);
  it.lo = lo;
  it.hi = hi;
  it.tolerance = tol;
  CompareOptions opt;
  opt.count = 60;
  it.verdict = sim_check(f, g, lo, hi, opt);
  double worst = 0;
  for (double t : log_grid(lo, hi, 40)) {
    double a = safe(f, t), b = safe(g, t);
    it.curve.push_back({t, a, b});
    worst = std::max(worst, std::fabs(a - b));
    if (std::isnan(a - b)) worst = kNaN;
  }
  it.max_abs_log_ratio = worst;
  it.pass = it.verdict.direction == Direction::Sim && worst <= tol;
  return it;
}

// log of the p0 = 1 conjugate asymptotic for g_0 g_1^{p_1} ... g_k^{p_k}
double log_conj_p0_one(const std::vector<double>& p, double s) {
  double p1 = p[1], p2 = p.size() > 2 ? p[2] : 0.0;
  double pre = (1 - p2 / p1) * std::log(p1) + (1 - 1 / p1) * std::log(s);
  double ex = (p2 / p1) * std::log(p1) + std::log(s) / p1;
  for (std::size_t j = 1; j + 1 < p.size(); ++j) {
    pre += p[j + 1] / p1 * lg(static_cast<int>(j), s);
    ex -= p[j + 1] / p1 * lg(static_cast<int>(j), s);
  }
  return pre + std::exp(ex);
}

}  // namespace

SuiteReport verify_example_suite() {
  auto t0 = std::chrono::steady_clock::now();
  SuiteReport r;
  const double log10 = std::log(10.0);

  for (double p : {1.5, 2.0, 3.0}) {
    auto phi = NFunction::power_law(p);
    double q = p / (p - 1);
    r.items.push_back(run_item(
        "power-conjugate-" + format_number(p), "numeric Phi* of t^p/p against s^q/q",
        [phi](double s) { return numeric_log_conjugate(phi, std::log(s)); },
        [q](double s) { return q * std::log(s) - std::log(q); }, 1e2, 1e6, 0.1));
    r.items.push_back(run_item(
        "power-h-" + format_number(p), "numeric h of t^p/p against q^{1/q} e^{t/q}",
        [phi](double t) { return numeric_log_h(phi, t); },
        [q](double t) { return std::log(q) / q + t / q; }, 10, 1e3, 0.1));
  }
  for (double a : {1.0, 2.0}) {
    auto phi = NFunction::exp_minus(a);
    r.items.push_back(run_item(
        "expminus-conjugate-" + format_number(a),
        "numeric Phi* of e^{at}-1-at against (1+s/a)log(1+s/a)-s/a",
        [phi](double s) { return numeric_log_conjugate(phi, std::log(s)); },
        [a](double s) {
          double u = s / a;
          return std::log((1 + u) * std::log1p(u) - u);
        },
        1e2, 1e6, 0.1));
    r.items.push_back(run_item(
        "expminus-h-" + format_number(a), "numeric h of e^{at}-1-at against (a/t) e^t",
        [phi](double t) { return numeric_log_h(phi, t); },
        [a](double t) { return std::log(a / t) + t; }, 10, 600, log10));
  }
  for (auto p : std::vector<std::vector<double>>{{2, 1}, {3, 2, 1}}) {
    auto phi = NFunction::log_product(p);
    r.items.push_back(run_item(
        "logproduct-conjugate-" + phi.describe(),
        "p0 > 1: numeric Phi* against s^{p0/(p0-1)} prod g_j(s)^{-p_j/(p0-1)}",
        [phi](double s) { return numeric_log_conjugate(phi, std::log(s)); },
        [p](double s) {
          double m = p[0] - 1, v = p[0] / m * std::log(s);
          for (std::size_t j = 1; j < p.size(); ++j) v -= p[j] / m * lg(static_cast<int>(j), s);
          return v;
        },
        1e2, 1e8, log10));
  }
  for (auto p : std::vector<std::vector<double>>{{1, 2}, {1, 3, 2}}) {
    auto phi = NFunction::log_product(p);
    // the exponent carries lower-order errors, so the logs are compared
    r.items.push_back(run_item(
        "logproduct-conjugate-" + phi.describe(),
        "p0 = 1: log of numeric Phi* against log of the asymptotic formula",
        [phi](double s) { return std::log(numeric_log_conjugate(phi, std::log(s))); },
        [p](double s) { return std::log(log_conj_p0_one(p, s)); }, 1e2, 1e8, log10));
  }
  {
    auto p = std::vector<double>{1, 3, 2};
    auto phi = NFunction::log_product(p);
    r.items.push_back(run_item(
        "logproduct-h-" + phi.describe(), "p0 = 1: numeric h against t^{p1} g_1(t)^{p2}",
        [phi](double t) { return numeric_log_h(phi, t); },
        [](double t) { return 3 * std::log(t) + 2 * lg(1, t); }, 1e2, 1e6, log10));
    r.items.push_back(run_item(
        "logproduct-h-of-log-" + phi.describe(), "h(log t) against Phi(t)/t, u = log t",
        [phi](double u) { return numeric_log_h(phi, u); },
        [phi](double u) { return phi.log_ratio(u); }, 1e2, 1e6, log10));
  }
  {
    auto phi = NFunction::power_law(2);
    LogFn f = [phi](double t) { return phi.log_eval(std::log(t)); };
    r.items.push_back(run_item("identity", "Phi against itself", f, f, 1, 1e6, 1e-12));
  }
  r.all_pass = true;
  for (const auto& it : r.items) r.all_pass = r.all_pass && it.pass;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace orlicz
