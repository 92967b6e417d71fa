#include "orlicz/quadrature.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "orlicz/errors.hpp"

namespace orlicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogOverflow = 700;
constexpr double kLogUnderflow = -690;

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

double to_level(int level, double t) {
  if (level == 0) return t;
  if (level == 1) return std::log(t);
  return std::log(std::log(t));
}

double log_t_of(int level, double z) {
  if (level == 0) return std::log(z);
  if (level == 1) return z;
  return std::exp(z);
}

}  // namespace

const char* condition_name(ConditionId c) {
  switch (c) {
    case ConditionId::I: return "I";
    case ConditionId::Second: return "second";
    case ConditionId::GreenE: return "green_E";
    case ConditionId::Generic: return "generic";
  }
  return "?";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Converges: return "Converges";
    case Verdict::Diverges: return "Diverges";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

nlohmann::json IntegrabilityReport::to_json() const {
  nlohmann::json j = {{"condition", condition_name(condition)},
                      {"verdict", verdict_name(verdict)},
                      {"lower_limit", lower_limit},
                      {"alpha_hat", alpha_hat},
                      {"decay_exponent", decay_exponent},
                      {"truncation_log_t", truncation_log_t},
                      {"truncation_level", truncation_level},
                      {"panels", panels},
                      {"model_tail", model_tail},
                      {"evidence", evidence}};
  if (verdict == Verdict::Converges) {
    j["value"] = value;
    j["error"] = error;
  } else {
    j["value"] = nullptr;
    j["partial_value"] = value;
  }
  if (cross_check_rel) j["cross_check_rel"] = *cross_check_rel;
  return j;
}

TailIntegral::TailIntegral(Integrand f, double a, QuadratureOptions opt)
    : f_(std::move(f)), a_(a), opt_(std::move(opt)) {
  if (!f_.f && !f_.log_f) throw ConfigError("integrand has no evaluator");
  if (!std::isfinite(a)) throw DomainError("lower limit must be finite");
  if (!(opt_.tol > 0)) throw ConfigError("tolerance must be positive");
  build();
}

double TailIntegral::lf(double u) const {
  if (f_.log_f) return f_.log_f(u);
  return std::log(f_.f(std::exp(u)));
}

double TailIntegral::log_g(int level, double z) const {
  if (level == 0) return f_.f ? std::log(f_.f(z)) : lf(std::log(z));
  if (level == 1) return lf(z) + z;
  double u = std::exp(z);
  return lf(u) + u + z;
}

double TailIntegral::integrand(double t) const {
  if (f_.f) return f_.f(t);
  return std::exp(lf(std::log(t)));
}

double TailIntegral::integrate(int level, double lo, double hi, double* err) const {
  auto g = [&](double z) {
    double v;
    if (level == 0 && f_.f)
      v = f_.f(z);
    else
      v = std::exp(log_g(level, z));
    if (std::isnan(v))
      throw EvaluationError("integrand is NaN", std::exp(log_t_of(level, z)));
    return v;
  };
  double e = 0;
  double tol = std::max(opt_.tol * 1e-2, 1e-14);
  double v = GK::integrate(g, lo, hi, 15, tol, &e);
  if (err) *err = e;
  return v;
}

double TailIntegral::model_tail(double log_t) const {
  const auto& a = opt_.model->exponents;
  std::size_t J = 0;
  while (J < a.size() && std::fabs(a[J] - 1) <= 1e-12) ++J;
  if (J == a.size() || a[J] < 1) return kInf;
  double lt = lf(log_t);
  for (std::size_t j = 0; j < J; ++j) lt += std::exp(log_iterated_log_of_exp(int(j) + 1, log_t));
  lt += log_iterated_log_of_exp(int(J), log_t) - std::log(a[J] - 1);
  return std::exp(lt);
}

void TailIntegral::build() {
  auto& r = report_;
  r.condition = opt_.condition;
  r.lower_limit = a_;
  double total = 0, err_total = 0;
  auto push = [&](int level, double lo, double hi) {
    double e = 0;
    double s = integrate(level, lo, hi, &e);
    pieces_.push_back({level, lo, hi, s, e});
    total += s;
    err_total += e;
    return s;
  };

  double start = a_;
  if (a_ < 1) {
    push(0, a_, 1);
    start = 1;
  }
  int level = 0;
  double z = start;
  std::vector<double> S;
  bool decided = false;
  // a converging tail model overrides the flat-panel heuristic, which misreads
  // long pre-asymptotic plateaus
  bool model_converges = false;
  if (opt_.model) {
    const auto& a = opt_.model->exponents;
    std::size_t J = 0;
    while (J < a.size() && std::fabs(a[J] - 1) <= 1e-12) ++J;
    model_converges = J < a.size() && a[J] > 1;
  }
  auto fit_alpha = [&]() {
    std::size_t k = S.size() - 1;
    std::size_t w = std::min<std::size_t>(14, k);
    if (w == 0 || !(S[k] > 0) || !(S[k - w] > 0)) return std::numeric_limits<double>::quiet_NaN();
    return std::log2(S[k - w] / S[k]) / double(w);
  };

  for (;;) {
    double zmax = level == 0 ? std::exp(std::min(f_.log_reach, kLogOverflow))
                  : level == 1 ? f_.log_reach
                               : std::log(f_.log_reach);
    if (!(z < zmax)) break;
    double z2 = 2 * z;
    if (z2 > zmax) break;
    double s = push(level, z, z2);
    S.push_back(s);
    r.truncation_log_t = log_t_of(level, z2);
    r.truncation_level = level;
    double a_fit = fit_alpha();
    if (std::isfinite(a_fit)) r.alpha_hat = a_fit;

    double lg_end = log_g(level, z2);
    if (lg_end > kLogOverflow) {
      r.verdict = Verdict::Diverges;
      r.evidence = "integrand overflows near log t = " + std::to_string(r.truncation_log_t);
      decided = true;
      break;
    }
    std::size_t k = S.size() - 1;
    if (s == 0 || (lg_end < kLogUnderflow && s < 1e-3 * opt_.tol * total)) {
      tail_ = 0;
      r.verdict = Verdict::Converges;
      r.evidence = "integrand underflows";
      decided = true;
      break;
    }
    if (k >= 2 && S[k - 1] > 0 && S[k - 2] > 0) {
      double ratio = std::max(S[k] / S[k - 1], S[k - 1] / S[k - 2]);
      if (ratio < 1) {
        double tail = S[k] * ratio / (1 - ratio);
        if (tail < opt_.tol * total) {
          tail_ = tail;
          r.verdict = Verdict::Converges;
          r.evidence = "geometric panel decay, ratio " + std::to_string(ratio);
          decided = true;
          break;
        }
      }
    }
    if (!model_converges && level <= 1 && k >= (level == 0 ? 14u : 3u) && std::isfinite(a_fit) &&
        a_fit <= 0.02) {
      r.verdict = Verdict::Diverges;
      r.evidence = "panel sums stop decaying (alpha_hat " + std::to_string(a_fit) + ")";
      decided = true;
      break;
    }
    z = z2;
    if (int(S.size()) >= opt_.max_panels_per_level && level < 2) {
      ++level;
      z = std::log(z);
      S.clear();
    }
  }

  if (!decided) {
    if (opt_.model) {
      const auto& a = opt_.model->exponents;
      std::size_t J = 0;
      while (J < a.size() && std::fabs(a[J] - 1) <= 1e-12) ++J;
      r.model_tail = true;
      if (J == a.size() || a[J] < 1) {
        r.verdict = Verdict::Diverges;
        r.evidence = "tail model " + opt_.model->source + ": leading exponent <= 1";
      } else {
        tail_ = model_tail(r.truncation_log_t);
        r.verdict = Verdict::Converges;
        r.evidence = "tail model " + opt_.model->source + " beyond log t = " +
                     std::to_string(r.truncation_log_t);
        err_total += 0.1 * tail_;
      }
    } else if (level >= 1 && S.size() >= 3 && S[S.size() - 2] > 0 && S[S.size() - 3] > 0) {
      // steady power decay in log t: extrapolate geometrically, full error
      std::size_t k = S.size() - 1;
      double r1 = S[k] / S[k - 1], r2 = S[k - 1] / S[k - 2];
      double ratio = std::max(r1, r2);
      if (ratio < std::exp2(-0.1) && std::fabs(r1 - r2) <= 0.1 * r2) {
        tail_ = S[k] * ratio / (1 - ratio);
        r.verdict = Verdict::Converges;
        r.evidence = "extrapolated power decay in log t, ratio " + std::to_string(ratio);
        err_total += tail_;
      } else {
        r.verdict = Verdict::Inconclusive;
        r.evidence = "reach exhausted without a decision and no tail model";
      }
    } else {
      r.verdict = Verdict::Inconclusive;
      r.evidence = "reach exhausted without a decision and no tail model";
    }
  }
  r.decay_exponent = -1 - r.alpha_hat;
  r.panels = int(pieces_.size());
  r.value = total + (r.verdict == Verdict::Converges ? tail_ : 0);
  r.error = err_total + (decided && r.verdict == Verdict::Converges ? tail_ : 0);

  suffix_.assign(pieces_.size() + 1, 0);
  suffix_.back() = tail_;
  for (std::size_t i = pieces_.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + pieces_[i].sum;
}

double TailIntegral::tail_from(double t) const {
  if (!(t >= a_)) throw DomainError("tail_from: t below the lower limit", a_);
  if (!report_.converges()) throw PreconditionError("tail of an integral that does not converge");
  if (t == a_) return suffix_[0];
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    double zt = to_level(p.level, t);
    if (zt <= p.hi) {
      double lo = std::max(zt, p.lo);
      return (lo < p.hi ? integrate(p.level, lo, p.hi, nullptr) : 0.0) + suffix_[i + 1];
    }
  }
  if (report_.model_tail) return model_tail(std::log(t));
  QuadratureOptions o = opt_;
  TailIntegral fresh(f_, t, o);
  return fresh.report().converges() ? fresh.report().value : 0.0;
}

IntegrabilityReport improper_tail_integral(const std::function<double(double)>& f, double a,
                                           double tol) {
  QuadratureOptions o;
  o.tol = tol;
  return TailIntegral(Integrand{f, nullptr, kLogOverflow}, a, o).report();
}

IntegrabilityReport improper_tail_integral(const Integrand& f, double a,
                                           const QuadratureOptions& opt) {
  return TailIntegral(f, a, opt).report();
}

std::optional<TailModel> I_tail_model(const ConjugatePair& pair, int n) {
  auto b = pair.h_growth_exponents();
  if (!b) return std::nullopt;
  TailModel m;
  for (double e : *b) m.exponents.push_back(e / n);
  m.source = "h^{-1/n} from " + pair.phi().describe();
  return m;
}

std::optional<TailModel> second_tail_model(const ConjugatePair& pair, int n) {
  auto b = pair.h_growth_exponents();
  if (!b) return std::nullopt;
  const auto& e = *b;
  TailModel m;
  m.exponents.push_back(1 + 1.0 / n - 1 / e[0]);
  for (std::size_t j = 1; j < e.size(); ++j) m.exponents.push_back(e[j] / e[0]);
  m.source = "t^{-1/n}/(h*)^{-1} from " + pair.phi().describe();
  return m;
}

namespace {

void check_n(int n) {
  if (n < 2) throw ConfigError("dimension n must be >= 2");
}

// Tabulated inputs only get a verdict with a user supplied model.
IntegrabilityReport run_condition(const ConjugatePair& pair, const Integrand& f, double a,
                                  QuadratureOptions o, bool have_user_model) {
  bool tabulated = pair.phi().family() == Family::Tabulated;
  if (!tabulated) return TailIntegral(f, a, o).report();
  IntegrabilityReport r;
  try {
    r = TailIntegral(f, a, o).report();
  } catch (const Error& e) {
    r.condition = o.condition;
    r.lower_limit = a;
    r.verdict = Verdict::Inconclusive;
    r.evidence = std::string("evaluation left the tabulated range: ") + e.what();
    return r;
  }
  if (!have_user_model) {
    r.evidence = "tabulated input without a tail model; numeric evidence: " + r.evidence +
                 " (" + verdict_name(r.verdict) + ")";
    r.verdict = Verdict::Inconclusive;
  }
  return r;
}

Integrand I_integrand(const ConjugatePair& pair, int n) {
  Integrand f;
  f.f = [&pair, n](double t) { return std::exp(-pair.log_h(t) / n); };
  f.log_f = [&pair, n](double u) { return -pair.log_h(std::exp(u)) / n; };
  f.log_reach = 600;
  return f;
}

Integrand second_integrand(const ConjugatePair& pair, int n) {
  Integrand f;
  f.log_f = [&pair, n](double u) { return -u / n - pair.log_hstar_inverse(u); };
  f.log_reach = kLogOverflow;
  return f;
}

}  // namespace

IntegrabilityReport I_of(const ConjugatePair& pair, int n, double tol,
                         std::optional<TailModel> user_model) {
  check_n(n);
  QuadratureOptions o;
  o.tol = tol;
  o.condition = ConditionId::I;
  bool user = user_model.has_value();
  o.model = user ? user_model : I_tail_model(pair, n);
  auto r = run_condition(pair, I_integrand(pair, n), 0.0, o, user);
  if (pair.phi().family() == Family::Tabulated) return r;

  // prefix [0, T] in t against the same prefix in s = e^t
  constexpr double T = 20;
  double a = 0;
  double lo = 0;
  for (double hi = 1; lo < T; lo = hi, hi = std::min(2 * hi, T))
    a += GK::integrate([&](double t) { return std::exp(-pair.log_h(t) / n); }, lo, hi, 15, 1e-12);
  double b = 0;
  double s_end = std::exp(T);
  for (double s = 1; s < s_end; s *= 2) {
    double s2 = std::min(2 * s, s_end);
    b += GK::integrate(
        [&](double v) { return 1 / (v * std::pow(pair.conjugate_inverse(v), 1.0 / n)); }, s, s2,
        15, 1e-12);
  }
  r.cross_check_rel = std::fabs(a - b) / std::max(std::fabs(a), 1e-300);
  return r;
}

IntegrabilityReport second_condition(const ConjugatePair& pair, int n, std::optional<double> tau0,
                                     double tol, std::optional<TailModel> user_model) {
  check_n(n);
  double t0 = tau0 ? *tau0 : pair.tau0();
  double a = pair.h(t0);
  if (!(a > pair.hstar_at_tau0()))
    throw DomainError("second condition: lower limit h(tau0) with tau0 = " + std::to_string(t0) +
                          " is not above h*(tau0)",
                      pair.hstar_at_tau0());
  QuadratureOptions o;
  o.tol = tol;
  o.condition = ConditionId::Second;
  bool user = user_model.has_value();
  o.model = user ? user_model : second_tail_model(pair, n);
  return run_condition(pair, second_integrand(pair, n), a, o, user);
}

HFunction::HFunction(const ConjugatePair& pair, int n, double tol) : n_(n) {
  check_n(n);
  QuadratureOptions o;
  o.tol = std::min(tol, 1e-11);
  o.condition = ConditionId::Second;
  o.model = second_tail_model(pair, n);
  double a = pair.h(pair.tau0());
  floor_ = pair.hstar_at_tau0();
  table_ = std::make_shared<TailIntegral>(second_integrand(pair, n), a, o);
  report_ = table_->report();
  if (!report_.converges())
    throw PreconditionError("H needs the second condition to converge for " +
                            pair.phi().describe() + "; verdict " + verdict_name(report_.verdict) +
                            ": " + report_.evidence);
}

double HFunction::operator()(double t) const {
  double a = table_->lower();
  if (t >= a) return table_->tail_from(t);
  if (t > floor_) {
    auto f = [this](double s) { return table_->integrand(s); };
    return GK::integrate(f, t, a, 15, 1e-12) + table_->tail_from(a);
  }
  throw DomainError("H(t) needs t > h*(tau0) = " + std::to_string(floor_), floor_);
}

double H_of(const ConjugatePair& pair, int n, double t) { return HFunction(pair, n)(t); }

ITail::ITail(const ConjugatePair& pair, int n, double tol) {
  check_n(n);
  QuadratureOptions o;
  o.tol = std::min(tol, 1e-11);
  o.condition = ConditionId::I;
  o.model = I_tail_model(pair, n);
  table_ = std::make_shared<TailIntegral>(I_integrand(pair, n), 0.0, o);
  if (!table_->report().converges())
    throw PreconditionError("I does not converge for " + pair.phi().describe());
}

double ITail::operator()(double t) const { return table_->tail_from(std::max(t, 0.0)); }

XiFunction::XiFunction(std::function<double(double)> log_E, double log_reach,
                       std::optional<TailModel> model, double tol) {
  Integrand f;
  f.log_f = [log_E = std::move(log_E)](double u) { return -u - log_E(u); };
  f.log_reach = log_reach;
  QuadratureOptions o;
  o.tol = tol;
  o.condition = ConditionId::GreenE;
  o.model = std::move(model);
  table_ = std::make_shared<TailIntegral>(std::move(f), 1.0, o);
}

double XiFunction::operator()(double t) const {
  if (!table_->report().converges())
    throw PreconditionError("xi needs int_1^inf ds/(s E(s)) to converge");
  return table_->tail_from(std::max(t, 1.0));
}

double xi_of(const std::function<double(double)>& E, double t) {
  XiFunction xi([E](double u) { return std::log(E(std::exp(u))); });
  return xi(t);
}

}  // namespace orlicz
