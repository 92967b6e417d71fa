#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace orlicz {

enum class Family { PowerLaw, ExpMinus, LogProduct, Tabulated };

const char* family_name(Family f);

// g_0(t) = t, g_{k+1}(t) = log(1 + g_k(t)).
double iterated_log(int k, double t);

// G_k = inverse of g_k: k applications of y -> e^y - 1. Throws OverflowError
// with partial() set; log_value() then holds the log of the last finite stage.
double iterated_log_inverse(int k, double y);

// log g_k(e^x), valid for every finite x (no e^x is formed when x is large).
double log_iterated_log_of_exp(int k, double x);

class NFunction {
 public:
  static NFunction power_law(double p);
  static NFunction exp_minus(double a);
  // exponents p_0..p_k of g_0^{p_0} g_1^{p_1} ... g_k^{p_k}
  static NFunction log_product(std::vector<double> exponents);
  // SlowGrowth(k, p) for dimension n: t g_1^n ... g_{k-1}^n g_k^p.
  static NFunction slow_growth(int k, double p, int n);
  // Samples (t_i, Phi(t_i)), t_i > 0 strictly increasing, at least four points.
  static NFunction tabulated(std::vector<double> t, std::vector<double> phi);

  // "power:2", "expminus:1", "logproduct:1,2,5", "slowgrowth:k,p,n",
  // "tabulated:<csv path with t,phi columns>"
  static NFunction parse(const std::string& descriptor);
  static NFunction from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string describe() const;

  Family family() const;
  const std::vector<double>& params() const;
  bool asymptotic_only() const;
  double asymptotic_floor() const;
  NFunction with_asymptotic_floor(double t) const;

  // Linear channel. eval returns +inf when Phi(t) exceeds the double range.
  double eval(double t) const;
  double derivative(double t) const;
  double eval_inverse(double y) const;

  // Log channel in x = log t.
  double log_eval(double x) const;           // log Phi(e^x)
  double elasticity_m1(double x) const;      // t Phi'(t) / Phi(t) - 1
  double log_ratio(double x) const;          // log(Phi(t)/t), no cancellation at large x
  double log_derivative(double x) const;     // log Phi'(e^x)
  double log_eval_inverse(double ly) const;  // log Phi^{-1}(e^ly)
  // log(Phi(t)/t) at t = exp(exp(xi)); +inf when that is not a double.
  double log_ratio_ll(double xi) const;

  double log_x_min() const;
  double log_x_max() const;

 private:
  struct Impl;
  explicit NFunction(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

struct ValidityReport {
  bool zero_at_origin = false;
  bool sublinear_at_zero = false;
  bool superlinear_at_infinity = false;
  bool convex = false;
  bool ratio_monotone = false;
  bool inconclusive = false;
  bool pass = false;
  std::string note;
  nlohmann::json to_json() const;
};

ValidityReport validate_nfunction(const NFunction& phi, const std::vector<double>& grid);

// count points, log-spaced, both ends included
std::vector<double> log_grid(double lo, double hi, std::size_t count);

// Default validation grid: 1e-6 .. 1e6, 8 points per decade.
std::vector<double> default_validation_grid();

}  // namespace orlicz
