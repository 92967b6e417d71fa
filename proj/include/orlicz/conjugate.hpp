#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"
#include "orlicz/nfunctions.hpp"

namespace orlicz {

enum class Provenance { ClosedForm, Numeric };

const char* provenance_name(Provenance p);

// Phi together with Phi*, h = (Phi*)^{-1} o exp and h*. Numeric components
// are evaluated through the primal maximizer t = e^x of s t - Phi(t):
//   s = Phi'(t),  log Phi*(s) = tau(x) = log Phi(t) + log(t Phi'/Phi - 1),
//   h(tau(x)) = Phi'(t),  h'(tau(x)) = sigma(x) = Phi'(t) - Phi(t)/t.
class ConjugatePair {
 public:
  explicit ConjugatePair(NFunction phi);

  const NFunction& phi() const { return phi_; }

  // parametric channel, x = log of the primal maximizer
  double tau_param(double x) const;        // log Phi*(Phi'(e^x))
  double log_sigma_param(double x) const;  // log(Phi'(t) - Phi(t)/t)
  double x_of_log_slope(double ls) const;  // log Phi'(e^x) = ls
  double x_of_tau(double tau) const;       // tau_param(x) = tau
  double x_of_log_sigma(double lsig) const;

  double conjugate(double s) const;  // closed form when the family has one
  double conjugate_numeric(double s) const;
  double log_conjugate(double ls) const;  // log Phi*(e^ls)
  double maximizer(double s) const;       // argmax_t (s t - Phi(t))
  double conjugate_inverse(double y) const;
  double log_conjugate_inverse(double ly) const;

  double h(double t) const;
  double log_h(double t) const;
  double log_h_prime(double t) const;
  double h_inverse(double y) const;  // log Phi*(y)

  double tau0() const;  // h(1)
  double h_at_zero() const;
  double hstar(double sigma) const;
  // log h*(sigma(x)) along the parametrisation; -inf where h* <= 0
  double log_hstar_param(double x) const;
  double hstar_inverse(double y) const;
  double log_hstar_inverse(double ly) const;
  double hstar_at_tau0() const;  // inverse is defined strictly above this

  Provenance conjugate_provenance() const;
  Provenance h_provenance() const;
  nlohmann::json provenance_json() const;

  // For LogProduct with p0 = 1, h(t) ~ t^{b_0} g_1^{b_1} ... g_{k-1}^{b_{k-1}}.
  std::optional<std::vector<double>> h_growth_exponents() const;

 private:
  NFunction phi_;
  double tau0_ = 0, x_tau0_sigma_ = 0, log_hstar_tau0_ = 0;
  double x_zero_ = 0, log_sigma_zero_ = 0, h_zero_ = 0;
  bool have_anchor_ = false;
  std::string anchor_error_;
  void require_anchor() const;
};

double conjugate_at(const NFunction& phi, double s);
double h_at(const ConjugatePair& pair, double t);
double hstar_at(const ConjugatePair& pair, double s);
double hstar_inverse_at(const ConjugatePair& pair, double y);

// sup_{t in [lo, hi]} (s t - f(t)) by grid search and Brent refinement; f is
// any evaluator, convex or not.
double legendre_sup(const std::function<double(double)>& f, double s, double lo, double hi,
                    std::size_t grid = 4001);

// Phi**(t) from sampled conjugate values on a wide log grid of slopes,
// refined with Brent's method. Independent of Phi'.
class Biconjugate {
 public:
  explicit Biconjugate(const ConjugatePair& pair, double log_s_lo = -40, double log_s_hi = 250,
                       std::size_t count = 8000);
  double operator()(double t) const;

 private:
  const ConjugatePair* pair_;
  std::vector<double> s_, c_;
};

struct YoungMargin {
  double margin;
  bool ok;
};
YoungMargin check_young(const ConjugatePair& pair, double s, double t);

struct ProductRatio {
  double ratio;
  bool ok;
};
ProductRatio check_universal_product(const ConjugatePair& pair, double t);

struct OrderVerdict {
  bool precondition = true;  // Phi1 < Phi2 held on the grid
  bool conjugate_order = true;
  bool h_order = true;
  double worst_conjugate_gap = 0;  // min of log Phi1* - log Phi2*
  double worst_h_gap = 0;          // min of log h2 - log h1
  bool pass() const { return precondition && conjugate_order && h_order; }
};
OrderVerdict check_conjugate_order(const NFunction& phi1, const NFunction& phi2,
                                   const std::vector<double>& grid);

}  // namespace orlicz
