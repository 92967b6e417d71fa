#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "orlicz/quadrature.hpp"

namespace orlicz {

// Opaque constants of the iteration arguments. Only bound shapes are
// computed; absolute values are relative to these.
struct ConstantLedger {
  double K = 1;  // Luxemburg bound of the density
  int n = 2;
  double C1 = 1, C2 = 1, C3 = 1, C4 = 1, C5 = 1;
  double A = 1;
  std::optional<double> phi_star_one;  // Phi*(1), reported, never folded in

  nlohmann::json to_json() const;
  static ConstantLedger from_json(const nlohmann::json& j);
};

enum class AsymptoteTag { Exp, Power, Slow, None };
const char* asymptote_name(AsymptoteTag t);

struct ClosedFormInfo {
  AsymptoteTag tag = AsymptoteTag::None;
  std::vector<double> params;  // exp: {a}; power: {p, q}; slow: {k, p}
};

// Recognizes ExpMinus, PowerLaw and LogProduct(1, n, ..., n, p) with p > n.
ClosedFormInfo recognize_closed_form(const NFunction& phi, int n);

// exp: d^{1/(1+n)} (-log d); power: d^{1/(1+nq)} (-log d)^{nq/(1+nq)};
// slow: C g_{k-1}(-log d)^{-(p-n)/n}. Throws UnsupportedError otherwise.
double hbar_closed_form(const NFunction& phi, int n, double delta);

// C of the slow form: the constant of int_tau^inf of the tail majorant,
// np/(p-n) for k = 1 and n/(p-n) for k >= 2.
double slow_growth_constant(int k, double p, int n);

// tau(delta), hbar(delta) for one pair and dimension; H is built once.
class StabilityFunction {
 public:
  StabilityFunction(const ConjugatePair& pair, int n, double tol = 1e-8);

  double delta_max() const { return delta_max_; }  // H(h(tau0)) / Phi*(h(tau0))
  double tau_of_delta(double delta) const;
  double hbar(double delta) const;
  const HFunction& H() const { return *H_; }
  const ConjugatePair& pair() const { return *pair_; }
  int n() const { return n_; }

 private:
  const ConjugatePair* pair_;
  int n_;
  std::shared_ptr<HFunction> H_;
  double delta_max_ = 0;
};

double tau_of_delta(const ConjugatePair& pair, int n, double delta);
double hbar(const ConjugatePair& pair, int n, double delta);

std::vector<double> default_delta_grid();  // 25 log-spaced points in [1e-12, 1e-3]

struct StabilityProfile {
  std::vector<double> delta, tau, hbar, hbar_closed;  // hbar_closed is NaN without a closed form
  ClosedFormInfo closed_form;
  ConstantLedger ledger;
  std::string phi;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

StabilityProfile stability_profile(const ConjugatePair& pair, int n,
                                   const std::vector<double>& deltas = default_delta_grid(),
                                   ConstantLedger ledger = {});

struct DeGiorgiReport {
  double t0 = 0;
  double log_s0 = 0;  // s0 = e^{t0}
  double s0 = 0;
  double jump_bound = 0;  // 2 C1 K^{1/n} int_{t0/2}^inf h^{-1/n}
  double vanishing_level = 0;  // s0 + jump_bound
  double I = 0;
  ConstantLedger ledger;
  nlohmann::json to_json() const;
};

// Smallest t0 with 2 C1 K^{1/n} int_{t0/2}^inf h^{-1/n} <= 1.
DeGiorgiReport degiorgi_threshold(const ConjugatePair& pair, int n, double K = 1, double C1 = 1);

// 2 C1 K^{1/n} int_{t0/2}^inf h^{-1/n} as a function of t0
double degiorgi_jump_bound(const ITail& tail, int n, double K, double C1, double t0);

struct IterationStep {
  double s, t, theta, jump, jump_bound;
};

struct IterationTrace {
  std::vector<IterationStep> steps;
  double total_jump = 0;
  double total_bound = 0;  // 2 C1 K^{1/n} int_{t0/2}^inf h^{-1/n}
  bool halved_each_step = true;
  bool jumps_within_bounds = true;
};

// Runs s_{j+1} = inf{s_j + r : theta(s_j + r) <= theta(s_j)/2} on a
// non-increasing theta, with t_j = delta_c / theta(s_j).
IterationTrace run_degiorgi_iteration(const ConjugatePair& pair, int n,
                                      const std::function<double(double)>& theta, double s0,
                                      double delta_c, double K = 1, double C1 = 1,
                                      int max_steps = 60);

struct StabilityThresholdReport {
  double rho0 = 0;
  double t0 = 0;              // 4K / rho0
  double tail = 0;            // int_{t0/2}^inf dt / (t^{1/n} (h*)^{-1}(t))
  double threshold = 0;       // 2 C5 * tail
  std::optional<double> delta;
  std::optional<double> tau;               // tau(delta)
  std::optional<double> assembled_at_tau;  // delta Phi*(tau) + 2 C5 H(tau) = (1 + 2C5) hbar
  std::optional<double> assembled_min;     // min over tau of the same expression
  ConstantLedger ledger;
  nlohmann::json to_json() const;
};

StabilityThresholdReport stability_threshold(const ConjugatePair& pair, int n, double K,
                                             double C5, double rho0,
                                             std::optional<double> delta = std::nullopt);

}  // namespace orlicz
