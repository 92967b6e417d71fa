#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "orlicz/conjugate.hpp"

namespace orlicz {

enum class ConditionId { I, Second, GreenE, Generic };
enum class Verdict { Converges, Diverges, Inconclusive };

const char* condition_name(ConditionId c);
const char* verdict_name(Verdict v);

// Integrand on [a, inf). Either channel may be empty; log_f(u) = log f(e^u)
// is used above the first level and must be valid for u <= log_reach.
struct Integrand {
  std::function<double(double)> f;
  std::function<double(double)> log_f;
  double log_reach = 700;
};

// Asymptotic shape f(t) ~ C * prod_j g_j(t)^{-a_j}, j = 0..m (g_0 = t).
struct TailModel {
  std::vector<double> exponents;
  std::string source;
};

struct QuadratureOptions {
  double tol = 1e-8;
  int max_panels_per_level = 24;
  std::optional<TailModel> model;
  ConditionId condition = ConditionId::Generic;
};

struct IntegrabilityReport {
  ConditionId condition = ConditionId::Generic;
  Verdict verdict = Verdict::Inconclusive;
  double value = 0;
  double error = 0;
  double lower_limit = 0;
  double alpha_hat = 0;       // t f(t) ~ t^{-alpha} on the last fitted level
  double decay_exponent = 0;  // -1 - alpha_hat
  double truncation_log_t = 0;
  int truncation_level = 0;
  int panels = 0;
  bool model_tail = false;
  std::string evidence;
  std::optional<double> cross_check_rel;

  bool converges() const { return verdict == Verdict::Converges; }
  nlohmann::json to_json() const;
};

// Runs the engine once and keeps the panel table so that tails from any
// t >= a cost one partial panel.
class TailIntegral {
 public:
  TailIntegral(Integrand f, double a, QuadratureOptions opt = {});

  const IntegrabilityReport& report() const { return report_; }
  double lower() const { return a_; }
  // int_t^inf f; needs a converged report and t >= a
  double tail_from(double t) const;
  // integrand at t, linear channel
  double integrand(double t) const;

 private:
  struct Piece {
    int level;
    double lo, hi, sum, err;
  };
  Integrand f_;
  double a_;
  QuadratureOptions opt_;
  std::vector<Piece> pieces_;
  std::vector<double> suffix_;
  double tail_ = 0;
  IntegrabilityReport report_;

  double lf(double u) const;
  double log_g(int level, double z) const;
  double integrate(int level, double lo, double hi, double* err) const;
  double model_tail(double log_t) const;
  void build();
};

IntegrabilityReport improper_tail_integral(const std::function<double(double)>& f, double a,
                                           double tol = 1e-8);
IntegrabilityReport improper_tail_integral(const Integrand& f, double a,
                                           const QuadratureOptions& opt);

// Tail models of the condition integrands for LogProduct with p0 = 1.
std::optional<TailModel> I_tail_model(const ConjugatePair& pair, int n);
std::optional<TailModel> second_tail_model(const ConjugatePair& pair, int n);

// int_0^inf h(t)^{-1/n} dt, with a cross-check against
// int_1^inf ds / (s (Phi*)^{-1}(s)^{1/n}) on a common prefix.
IntegrabilityReport I_of(const ConjugatePair& pair, int n, double tol = 1e-8,
                         std::optional<TailModel> user_model = std::nullopt);

// int_{h(tau0)}^inf dt / (t^{1/n} (h*)^{-1}(t)), tau0 = h(1) unless given.
IntegrabilityReport second_condition(const ConjugatePair& pair, int n,
                                     std::optional<double> tau0 = std::nullopt, double tol = 1e-8,
                                     std::optional<TailModel> user_model = std::nullopt);

// H(t) = int_t^inf ds / (s^{1/n} (h*)^{-1}(s)).
class HFunction {
 public:
  HFunction(const ConjugatePair& pair, int n, double tol = 1e-8);
  // defined for t > h*(tau0); tabulated from h(tau0)
  double operator()(double t) const;
  double lower() const { return table_->lower(); }  // h(tau0)
  double integrand(double t) const { return table_->integrand(t); }
  const IntegrabilityReport& report() const { return report_; }
  int n() const { return n_; }

 private:
  int n_;
  double floor_ = 0;  // h*(tau0)
  std::shared_ptr<TailIntegral> table_;
  IntegrabilityReport report_;
};

double H_of(const ConjugatePair& pair, int n, double t);

// tail of the first condition: int_t^inf h^{-1/n}
class ITail {
 public:
  ITail(const ConjugatePair& pair, int n, double tol = 1e-8);
  double operator()(double t) const;
  double integrand(double t) const { return table_->integrand(t); }
  const IntegrabilityReport& report() const { return table_->report(); }

 private:
  std::shared_ptr<TailIntegral> table_;
};

// xi(t) = int_t^inf ds / (s E(s)) for t >= 1, xi(t) = xi(1) below 1.
// E is given through log E(e^u) as a function of u = log t.
class XiFunction {
 public:
  XiFunction(std::function<double(double)> log_E, double log_reach = 700,
             std::optional<TailModel> model = std::nullopt, double tol = 1e-8);
  double operator()(double t) const;
  const IntegrabilityReport& report() const { return table_->report(); }

 private:
  std::shared_ptr<TailIntegral> table_;
};

double xi_of(const std::function<double(double)>& E, double t);

}  // namespace orlicz
