#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "orlicz/nfunctions.hpp"
#include "orlicz/parametric_sup.hpp"
#include "orlicz/quadrature.hpp"

namespace orlicz {

struct GeometryLedger {
  double A = 1, K = 1, L = 1, C = 1;  // C enters v(r) = 1 / (Psi* o tilde Psi*)(C / r^2)
  nlohmann::json to_json() const;
  static GeometryLedger from_json(const nlohmann::json& j);
};

struct GeometryInputs {
  NFunction phi;
  NFunction phi1;
  int n = 2;
  int ell = 0;
  double q = 0;
  double q_prime = 2.5;
  GeometryLedger ledger;
  nlohmann::json to_json() const;
};

// Number k of log factors: LogProduct(p0..pk) gives k, other families 0.
int log_depth(const NFunction& phi);

// LogProduct(1, n, ..., n, q) with ell copies of n
NFunction witness_phi1(int n, int ell, double q);

// Phi1 = witness_phi1(n, ell, q) with ell = k + 2 and q = 2n unless given.
GeometryInputs make_geometry_inputs(const NFunction& phi, int n, std::optional<int> ell = {},
                                    std::optional<double> q = {}, double q_prime = 2.5);

// Phi2(s) with Phi2(Phi1(t)/t) = Phi(t)/t, for s >= Phi1(1).
double phi2_of(const NFunction& phi, const NFunction& phi1, double s);

// log g_i(t) at t = exp(exp(xi)); g_0 = t
double log_g_ll(int i, double xi);

// E1, E2 and E = min(E1, E2) for one (Phi, Phi1, n); E(t) = E(1) for t < 1.
// Phi2* is a grid supremum over the parametrisation t -> (Phi1(t)/t, Phi(t)/t).
class EFunction {
 public:
  EFunction(NFunction phi, NFunction phi1, int n);

  // x = log t
  double log_E1(double x) const;
  double log_E2(double x) const;  // +inf when no s <= e^{2x+700} qualifies, e^{-50} at the floor
  double log_E(double x) const;
  // x = exp(xi), for t beyond the double range
  double log_E_ll(double xi) const;

  double E1(double t) const;
  double E2(double t) const;
  double E(double t) const;

  double log_phi2_star(double ly) const { return phi2_star_->log_sup(ly); }
  double phi2_star(double y) const;

  const NFunction& phi() const { return phi_; }
  const NFunction& phi1() const { return phi1_; }
  int n() const { return n_; }

 private:
  NFunction phi_, phi1_;
  int n_;
  std::shared_ptr<ParametricSup> phi2_star_;

  double dual_gap(double x, double ls) const;  // log(Phi2*(e^{n ls}) / e^{ls}) - x
  double refine_E2(double x, double a, double fa, double b, double fb) const;
  double E2_below(double x, double b, double fb) const;
};

// log E exact at fixed nodes, pchip in x = log t in between. Nodes are
// uniform on [0, 8] and uniform in xi = log x on [log 8, xi_max].
class LogETable {
 public:
  explicit LogETable(std::shared_ptr<const EFunction> E, double xi_max = 690);
  double operator()(double x) const;  // x = log t
  double ll(double xi) const;         // x = e^xi
  double xi_max() const { return xi_max_; }

 private:
  std::shared_ptr<const EFunction> E_;
  double xi_max_, x_max_ = 0;
  std::shared_ptr<const void> spline_;
};

enum class CheckVerdict { Holds, Fails, Inconclusive };
const char* check_verdict_name(CheckVerdict v);

struct GrowthReport {
  double L = 0;        // sup over the whole grid
  double L_small = 0;  // sup over pairs with t1, t2 <= sqrt(grid max)
  double t1 = 1, t2 = 1;
  std::optional<double> bound;  // 4^{q1 + ... + q_m} for LogProduct(1, q...)
  CheckVerdict verdict = CheckVerdict::Inconclusive;
  std::string note;
  nlohmann::json to_json() const;
};

// sup of [Phi(t1 t2)/(t1 t2)] / [Phi(t1)/t1 + Phi(t2)/t2] over grid x grid.
GrowthReport check_growth_L(const NFunction& phi, const std::vector<double>& grid = {});

struct LemmaEReport {
  double C = 0;  // sup of Phi1(E^n) / (E t)
  double worst_t = 1;
  bool finite = false;
  nlohmann::json to_json() const;
};

LemmaEReport check_lemma_E_bound(const EFunction& E, const std::vector<double>& grid = {});

// Pointwise checks of E^{n-1} <= t^2/Phi1 <= t/Phi1(1) and Phi2*(E^n) <= t E.
struct ComparisonReport {
  double worst_first = -1e300;   // max of log(E^{n-1} Phi1 / t^2)
  double worst_second = -1e300;  // max of log(t Phi1(1) / Phi1(t))
  double worst_dual = -1e300;    // max of log(Phi2*(E^n) / (t E))
  bool pass = false;
  nlohmann::json to_json() const;
};

ComparisonReport check_comparisons(const EFunction& E, const std::vector<double>& grid,
                                   double rel_tol = 1e-9);

// int_1^inf dt / (t E(t)) with E given as log E(e^u).
IntegrabilityReport green_integrability(const std::function<double(double)>& log_E,
                                        std::optional<TailModel> model = std::nullopt,
                                        double tol = 1e-8);
// tabulates E up to t = e^700 first
IntegrabilityReport green_integrability(const EFunction& E,
                                        std::optional<TailModel> model = std::nullopt,
                                        double tol = 1e-8);

// Exponents e_i of prod g_i^{e_i}, i = 0.. (g_0 = t).
struct ExponentRecord {
  std::string subcase;
  int n = 2;
  std::vector<double> p;
  int ell = 0;
  double q = 0, q_prime = 2.5;
  std::vector<double> E1, E2, E;
  // Psi* o tilde Psi* as prod g_i^{c_i}; empty for the exponential shapes
  std::vector<double> composition;
  // t-exponent inside exp{...} of Psi* o tilde Psi* for slow-2.1, NaN otherwise
  double exp_t_exponent = 0;
  TailModel green_model;
  bool green_converges = false;

  double log_E_closed(double x) const;  // log prod g_i(e^x)^{E_i}
  double log_E_closed_ll(double xi) const;
  nlohmann::json to_json() const;
};

// descriptor: poly, slow-k1, slow-2.1, slow-2.2, slow-2.3. p is the exponent
// vector of Phi: {p} for poly and slow-k1, {1, n, p2, ..., pk} otherwise.
ExponentRecord closed_form_exponents(const std::string& descriptor, int n,
                                     const std::vector<double>& p, int ell, double q,
                                     double q_prime = 2.5);

// Subcase descriptor and record for (Phi, n) with the witness shape (ell, q).
std::optional<ExponentRecord> recognize_subcase(const NFunction& phi, int n, int ell, double q,
                                                double q_prime = 2.5);

enum class Feasibility { Feasible, Infeasible, Unknown };
const char* feasibility_name(Feasibility f);

struct FeasibilityReport {
  Feasibility verdict = Feasibility::Unknown;
  bool symbolic = false;
  std::optional<std::string> witness;  // descriptor of Phi1
  std::string reason;
  std::string phi;
  int n = 2;
  nlohmann::json checks = nlohmann::json::object();
  nlohmann::json to_json() const;
};

// Criterion on LogProduct exponents; UnsupportedError for other families.
FeasibilityReport diameter_feasible_symbolic(const NFunction& phi, int n);
// Witness search over ell = k+2 .. k+1+budget and q in {n+0.5, n+1, 2n}.
FeasibilityReport witness_search(const NFunction& phi, int n, int budget = 2);
// Symbolic for LogProduct, witness search otherwise.
FeasibilityReport diameter_feasible(const NFunction& phi, int n, int budget = 2);

class GeometryBound {
 public:
  explicit GeometryBound(GeometryInputs in);

  const GeometryInputs& inputs() const { return in_; }
  const EFunction& E() const { return *E_; }
  const IntegrabilityReport& green() const { return green_; }
  const IntegrabilityReport& green_tilde() const { return green_tilde_; }
  const std::optional<ExponentRecord>& closed_form() const { return closed_; }

  double log_E_tilde(double x) const;  // log(c g_1 ... g_ell g_{ell+1}^{q'})
  double tilde_scale() const { return tilde_scale_; }
  double tilde_psi(double u) const;  // E(t) where E_tilde(t) = u
  double log_psi_star(double ly) const { return psi_star_->log_sup(ly); }
  double log_tilde_psi_star(double ly) const { return tilde_psi_star_->log_sup(ly); }
  double log_composed(double ly) const;  // log (Psi* o tilde Psi*)(e^ly)

  double log_volume(double r) const;
  double volume(double r) const;
  // -log prod g_i(C/r^2)^{c_i} from the composition exponents; NaN without them
  double log_volume_closed(double r) const;

  std::string volume_csv(const std::vector<double>& r) const;
  std::string E_csv(const std::vector<double>& t) const;
  nlohmann::json to_json() const;

 private:
  GeometryInputs in_;
  std::shared_ptr<EFunction> E_;
  std::shared_ptr<LogETable> table_;
  IntegrabilityReport green_, green_tilde_;
  std::optional<ExponentRecord> closed_;
  double tilde_scale_ = 1;
  std::shared_ptr<ParametricSup> psi_star_, tilde_psi_star_;

  double log_tilde_base(double x) const;
  double log_tilde_base_ll(double xi) const;
};

// Requires green integrability of E; ConfigError naming q' when E_tilde fails.
GeometryBound psi_pipeline(const GeometryInputs& in);
double volume_lower_bound(const GeometryBound& bound, double r);

}  // namespace orlicz
