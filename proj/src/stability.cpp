#include "orlicz/stability.hpp"

#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "orlicz/csv_io.hpp"
#include "orlicz/detail/roots.hpp"
#include "orlicz/errors.hpp"

namespace orlicz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_add(double a, double b) {
  double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

nlohmann::json num_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::json ConstantLedger::to_json() const {
  nlohmann::json j = {{"K", K},   {"n", n},   {"C1", C1}, {"C2", C2},
                      {"C3", C3}, {"C4", C4}, {"C5", C5}, {"A", A}};
  j["phi_star_one"] = phi_star_one ? num_or_null(*phi_star_one) : nlohmann::json(nullptr);
  return j;
}

ConstantLedger ConstantLedger::from_json(const nlohmann::json& j) {
  ConstantLedger l;
  if (!j.is_object()) throw ConfigError("constant ledger must be a JSON object");
  for (auto& [key, v] : j.items()) {
    if (key == "phi_star_one") continue;
    if (!v.is_number()) throw ConfigError("ledger entry " + key + " must be a number");
    double x = v.get<double>();
    if (key == "n") {
      l.n = int(x);
      if (l.n != x || l.n < 2) throw ConfigError("ledger n must be an integer >= 2");
      continue;
    }
    if (!(x > 0) || !std::isfinite(x)) throw ConfigError("ledger entry " + key + " must be > 0");
    if (key == "K") l.K = x;
    else if (key == "C1") l.C1 = x;
    else if (key == "C2") l.C2 = x;
    else if (key == "C3") l.C3 = x;
    else if (key == "C4") l.C4 = x;
    else if (key == "C5") l.C5 = x;
    else if (key == "A") l.A = x;
    else throw ConfigError("unknown ledger entry " + key);
  }
  return l;
}

const char* asymptote_name(AsymptoteTag t) {
  switch (t) {
    case AsymptoteTag::Exp: return "exp";
    case AsymptoteTag::Power: return "power";
    case AsymptoteTag::Slow: return "slow";
    case AsymptoteTag::None: return "none";
  }
  return "?";
}

ClosedFormInfo recognize_closed_form(const NFunction& phi, int n) {
  const auto& p = phi.params();
  switch (phi.family()) {
    case Family::ExpMinus: return {AsymptoteTag::Exp, {p[0]}};
    case Family::PowerLaw: return {AsymptoteTag::Power, {p[0], p[0] / (p[0] - 1)}};
    case Family::LogProduct: {
      std::size_t k = p.size() - 1;
      if (p[0] != 1 || k < 1 || !(p[k] > n)) break;
      for (std::size_t i = 1; i < k; ++i)
        if (p[i] != n) return {};
      return {AsymptoteTag::Slow, {double(k), p[k]}};
    }
    default: break;
  }
  return {};
}

double slow_growth_constant(int k, double p, int n) {
  return k == 1 ? n * p / (p - n) : n / (p - n);
}

double hbar_closed_form(const NFunction& phi, int n, double delta) {
  if (!(delta > 0 && delta < 1)) throw DomainError("hbar_closed_form: delta must lie in (0, 1)");
  auto info = recognize_closed_form(phi, n);
  double L = -std::log(delta);
  switch (info.tag) {
    case AsymptoteTag::Exp: return std::pow(delta, 1.0 / (1 + n)) * L;
    case AsymptoteTag::Power: {
      double nq = n * info.params[1];
      return std::pow(delta, 1 / (1 + nq)) * std::pow(L, nq / (1 + nq));
    }
    case AsymptoteTag::Slow: {
      int k = int(info.params[0]);
      double p = info.params[1];
      return slow_growth_constant(k, p, n) * std::pow(iterated_log(k - 1, L), -(p - n) / n);
    }
    case AsymptoteTag::None: break;
  }
  throw UnsupportedError("no closed-form hbar for " + phi.describe() + " with n = " +
                         std::to_string(n));
}

StabilityFunction::StabilityFunction(const ConjugatePair& pair, int n, double tol)
    : pair_(&pair), n_(n), H_(std::make_shared<HFunction>(pair, n, tol)) {
  double a = H_->lower();
  delta_max_ = std::exp(std::log((*H_)(a)) - pair.log_conjugate(std::log(a)));
}

double StabilityFunction::tau_of_delta(double delta) const {
  if (!(delta > 0)) throw DomainError("tau_of_delta: delta must be > 0", delta_max_);
  if (delta > delta_max_ * (1 + 1e-12))
    throw DomainError("tau(delta) is unique only for delta <= " + std::to_string(delta_max_),
                      delta_max_);
  double la = std::log(H_->lower());
  double ld = std::log(delta);
  auto F = [&](double l) {
    return ld + pair_->log_conjugate(l) - std::log((*H_)(std::exp(l)));
  };
  if (F(la) >= 0) return H_->lower();
  return std::exp(detail::solve_increasing(F, la, 1.0, la, 700.0, 1e-13, "tau_of_delta"));
}

double StabilityFunction::hbar(double delta) const { return (*H_)(tau_of_delta(delta)); }

double tau_of_delta(const ConjugatePair& pair, int n, double delta) {
  return StabilityFunction(pair, n).tau_of_delta(delta);
}

double hbar(const ConjugatePair& pair, int n, double delta) {
  return StabilityFunction(pair, n).hbar(delta);
}

std::vector<double> default_delta_grid() { return log_grid(1e-12, 1e-3, 25); }

StabilityProfile stability_profile(const ConjugatePair& pair, int n,
                                   const std::vector<double>& deltas, ConstantLedger ledger) {
  StabilityFunction st(pair, n);
  StabilityProfile prof;
  prof.phi = pair.phi().describe();
  prof.closed_form = recognize_closed_form(pair.phi(), n);
  ledger.n = n;
  ledger.phi_star_one = pair.conjugate_numeric(1.0);
  prof.ledger = ledger;
  for (double d : deltas) {
    double t = st.tau_of_delta(d);
    prof.delta.push_back(d);
    prof.tau.push_back(t);
    prof.hbar.push_back(st.H()(t));
    prof.hbar_closed.push_back(prof.closed_form.tag == AsymptoteTag::None
                                   ? kNaN
                                   : hbar_closed_form(pair.phi(), n, d));
  }
  return prof;
}

std::string StabilityProfile::to_csv() const {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < delta.size(); ++i)
    rows.push_back({delta[i], tau[i], hbar[i], hbar_closed[i]});
  return orlicz::to_csv({"delta", "tau", "hbar", "hbar_closed"}, rows);
}

nlohmann::json StabilityProfile::to_json() const {
  nlohmann::json hc = nlohmann::json::array();
  for (double v : hbar_closed) hc.push_back(num_or_null(v));
  return {{"phi", phi},
          {"closed_form", {{"tag", asymptote_name(closed_form.tag)}, {"params", closed_form.params}}},
          {"ledger", ledger.to_json()},
          {"delta", delta},
          {"tau", tau},
          {"hbar", hbar},
          {"hbar_closed", hc}};
}

nlohmann::json DeGiorgiReport::to_json() const {
  return {{"t0", t0},
          {"log_s0", log_s0},
          {"s0", num_or_null(s0)},
          {"jump_bound", jump_bound},
          {"vanishing_level", num_or_null(vanishing_level)},
          {"I", I},
          {"ledger", ledger.to_json()}};
}

double degiorgi_jump_bound(const ITail& tail, int n, double K, double C1, double t0) {
  return 2 * C1 * std::pow(K, 1.0 / n) * tail(t0 / 2);
}

DeGiorgiReport degiorgi_threshold(const ConjugatePair& pair, int n, double K, double C1) {
  if (!(K > 0) || !(C1 > 0)) throw DomainError("degiorgi_threshold: K and C1 must be > 0");
  auto ir = I_of(pair, n);
  if (!ir.converges())
    throw PreconditionError("De Giorgi threshold needs I to converge for " +
                            pair.phi().describe() + "; verdict " + verdict_name(ir.verdict));
  ITail tail(pair, n);
  DeGiorgiReport r;
  r.I = tail(0);
  r.ledger.K = K;
  r.ledger.C1 = C1;
  r.ledger.n = n;
  r.ledger.phi_star_one = pair.conjugate_numeric(1.0);
  auto f = [&](double t0) { return -std::log(degiorgi_jump_bound(tail, n, K, C1, t0)); };
  r.t0 = f(0) >= 0 ? 0.0 : detail::solve_increasing(f, 1.0, 1.0, 0.0, 1e300, 1e-13, "degiorgi t0");
  r.jump_bound = degiorgi_jump_bound(tail, n, K, C1, r.t0);
  r.log_s0 = r.t0;
  r.s0 = std::exp(r.t0);
  r.vanishing_level = r.s0 + r.jump_bound;
  return r;
}

IterationTrace run_degiorgi_iteration(const ConjugatePair& pair, int n,
                                      const std::function<double(double)>& theta, double s0,
                                      double delta_c, double K, double C1, int max_steps) {
  ITail tail(pair, n);
  double c = C1 * std::pow(K, 1.0 / n);
  IterationTrace tr;
  double s = s0, th = theta(s0);
  if (!(th > 0)) return tr;
  double t0 = delta_c / th;
  tr.total_bound = 2 * c * tail(t0 / 2);
  for (int j = 0; j < max_steps && th > 0; ++j) {
    double t = delta_c / th;
    double target = 0.5 * th;
    auto done = [&](double r) { return theta(s + r) <= target; };
    double hi = 1e-6;
    int grow = 0;
    while (!done(hi) && grow++ < 200) hi *= 2;
    if (!done(hi)) break;
    double lo = 0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, s + hi); ++i) {
      double m = 0.5 * (lo + hi);
      (done(m) ? hi : lo) = m;
    }
    double bound = c * t * std::exp(-pair.log_h(t) / n);
    double th_next = theta(s + hi);
    tr.steps.push_back({s, t, th, hi, bound});
    tr.total_jump += hi;
    if (hi > bound * (1 + 1e-9)) tr.jumps_within_bounds = false;
    if (th_next > target * (1 + 1e-12)) tr.halved_each_step = false;
    s += hi;
    th = th_next;
  }
  return tr;
}

nlohmann::json StabilityThresholdReport::to_json() const {
  nlohmann::json j = {{"rho0", rho0},
                      {"t0", t0},
                      {"tail", tail},
                      {"threshold", threshold},
                      {"ledger", ledger.to_json()}};
  if (delta) j["delta"] = *delta;
  if (tau) j["tau"] = *tau;
  if (assembled_at_tau) j["assembled_at_tau"] = *assembled_at_tau;
  if (assembled_min) j["assembled_min"] = *assembled_min;
  return j;
}

StabilityThresholdReport stability_threshold(const ConjugatePair& pair, int n, double K,
                                             double C5, double rho0,
                                             std::optional<double> delta) {
  if (!(K > 0) || !(C5 > 0)) throw DomainError("stability_threshold: K and C5 must be > 0");
  double phi_star_one = pair.conjugate_numeric(1.0);
  double rho_max = phi_star_one * K;
  if (!(rho0 > 0) || rho0 > rho_max)
    throw DomainError("initial mass rho0 must lie in (0, Phi*(1) K] = (0, " +
                          std::to_string(rho_max) + "]",
                      rho_max);
  StabilityFunction st(pair, n);
  StabilityThresholdReport r;
  r.rho0 = rho0;
  r.t0 = 4 * K / rho0;
  r.tail = st.H()(r.t0 / 2);
  r.threshold = 2 * C5 * r.tail;
  r.ledger.K = K;
  r.ledger.C5 = C5;
  r.ledger.n = n;
  r.ledger.phi_star_one = phi_star_one;
  if (delta) {
    double d = *delta;
    double tau = st.tau_of_delta(d);
    r.delta = d;
    r.tau = tau;
    auto lg = [&](double l) {
      return log_add(std::log(d) + pair.log_conjugate(l),
                     std::log(2 * C5) + std::log(st.H()(std::exp(l))));
    };
    r.assembled_at_tau = std::exp(lg(std::log(tau)));
    double la = std::log(st.H().lower());
    auto best = boost::math::tools::brent_find_minima(lg, la, std::log(tau) + 5, 40);
    r.assembled_min = std::min(std::exp(best.second), std::exp(lg(la)));
  }
  return r;
}

}  // namespace orlicz
