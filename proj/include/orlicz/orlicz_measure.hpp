#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "orlicz/conjugate.hpp"
#include "orlicz/nfunctions.hpp"

namespace orlicz {

// Values F_i >= 0 with probability weights w_i.
class SampledDensity {
 public:
  // DataError on negative or non-finite values, non-positive weights or
  // weights not summing to 1. normalized requires sum w_i F_i = 1.
  SampledDensity(std::vector<double> values, std::vector<double> weights, bool normalized = false);
  // equal weights 1/N
  static SampledDensity uniform(std::vector<double> values, bool normalized = false);
  // columns value, weight
  static SampledDensity from_csv(const std::string& path, bool normalized = false);

  const std::vector<double>& values() const { return F_; }
  const std::vector<double>& weights() const { return w_; }
  std::size_t size() const { return F_.size(); }
  bool normalized() const { return normalized_; }
  double mass() const;
  double measure(const std::vector<std::uint8_t>& mask) const;
  double masked_mass(const std::vector<std::uint8_t>& mask) const;
  SampledDensity scaled(double c) const;

  std::string to_csv() const;
  void write_csv(const std::string& path) const;

 private:
  std::vector<double> F_, w_;
  bool normalized_;
};

// log Phi(e^x) of any Young function; the N-function overloads use log_eval.
using LogYoung = std::function<double(double)>;

// sum_i w_i Phi(F_i / b)
double modular(const NFunction& phi, const SampledDensity& F, double b = 1);
double modular(const LogYoung& log_phi, const SampledDensity& F, double b = 1);

// the b with sum w_i Phi(F_i / b) = 1; 0 for F = 0
double luxemburg_norm(const NFunction& phi, const SampledDensity& F);
double luxemburg_norm(const LogYoung& log_phi, const SampledDensity& F);
// norm in the complementary space L^{Phi*}
double luxemburg_norm_conjugate(const ConjugatePair& pair, const SampledDensity& F);

struct ModularBound {
  double modular = 0;
  double norm = 0;
  bool holds = false;  // norm <= modular
  nlohmann::json to_json() const;
};

// PreconditionError unless the modular is finite and >= 1.
ModularBound norm_from_modular(const NFunction& phi, const SampledDensity& F);

struct YoungSplit {
  double epsilon = 0;
  double norm = 0;
  double measure = 0;  // mu(mask)
  double bound = 0;    // eps |F| (1 + Phi*(1/eps) mu(mask))
  double actual = 0;   // sum over the mask of w_i F_i
  bool holds = false;
  nlohmann::json to_json() const;
};

YoungSplit youngsplit_bound(const ConjugatePair& pair, const SampledDensity& F,
                            const std::vector<std::uint8_t>& mask, double epsilon);
// epsilon minimising the bound (Brent in log epsilon)
YoungSplit youngsplit_optimal(const ConjugatePair& pair, const SampledDensity& F,
                              const std::vector<std::uint8_t>& mask);

struct TailPoint {
  double s = 0;
  double level_measure = 0;  // min(1, C'/s)
  double bound = 0;          // C |F| (1 + C') / (Phi*)^{-1}(s)
  double actual = 0;         // largest mass of F on a set of that measure
};

// Level sets at height s are assumed to have measure at most C'/s; epsilon
// solves Phi*(1/epsilon) = s. Needs a normalized density.
std::vector<TailPoint> tail_bound_curve(const ConjugatePair& pair, const SampledDensity& F,
                                        const std::vector<double>& s_grid, double C = 1,
                                        double C_prime = 1);
// sup of sum_E w_i F_i over sets (cells split fractionally) with mu(E) <= m
double worst_tail_mass(const SampledDensity& F, double m);
std::string tail_curve_csv(const std::vector<TailPoint>& curve);

// Midpoint samples on the periodic box [-1/2, 1/2)^dim with grid^dim cells,
// singular point at a cell corner, rescaled to mass 1.
//   constant:c              F = c (normalized only for c = 1)
//   power-spike:gamma       |x|^{-gamma}, 0 <= gamma < dim
//   log-spike:gamma         log(1 + 1/|x|)^gamma, gamma > 0
//   single-spike:delta0     1 - delta0 everywhere plus mass delta0 in one cell
//   random:sigma,seed       exp(sigma Z) with Z standard normal
struct DensitySpec {
  std::string kind = "constant";
  double gamma = 1;
  int grid = 64;
  int dim = 2;
  unsigned seed = 1;
  nlohmann::json to_json() const;
  static DensitySpec from_json(const nlohmann::json& j);
  // "kind:gamma[,grid[,dim]]"; random uses "random:sigma,seed[,grid[,dim]]"
  static DensitySpec parse(const std::string& descriptor);
};

// ConfigError for an unknown kind or a gamma outside the integrable range.
SampledDensity generate_density(const DensitySpec& spec);
// "csv:<path>" or a generator descriptor
SampledDensity load_density(const std::string& descriptor);

// |x|^{-gamma} lies in L^p of the dim-box iff p gamma < dim
bool power_spike_in_Lp(double p, double gamma, int dim);
// Norms on grids m, 2m, 4m; unbounded when the last step still grows by more
// than the given factor.
struct RefinementVerdict {
  std::vector<double> norms;
  double last_ratio = 1;
  bool bounded = true;
  nlohmann::json to_json() const;
};
RefinementVerdict norm_under_refinement(const NFunction& phi, DensitySpec spec,
                                        double growth_factor = 1.1);

}  // namespace orlicz
