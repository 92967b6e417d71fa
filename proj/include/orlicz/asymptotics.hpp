#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "orlicz/nfunctions.hpp"

namespace orlicz {

// t -> log f(t); every comparison runs in log space
using LogFn = std::function<double(double)>;

enum class Direction { Prec, NotPrec, Sim, Inconclusive };
const char* direction_name(Direction d);

struct ComparisonVerdict {
  Direction direction = Direction::Inconclusive;
  // f(t) <= C1 g(C2 t) on the tested range
  double C1 = 0, C2 = 0;
  // witnesses of g <= C1_rev f(C2_rev t); sim_check only
  double C1_rev = 0, C2_rev = 0;
  double lo = 0, hi = 0;
  // growth of log f(t) - log g(C2 t) over the top two decades
  double max_violation = 0;
  std::string note;
  nlohmann::json to_json() const;
};

struct CompareOptions {
  double budget = 1e6;        // largest acceptable C1
  std::size_t count = 200;    // log-spaced samples on [lo, hi]
  int scale_exponent = 10;    // C2 in 2^{-k} .. 2^{k}
  double growth_limit = 0.5;  // log-ratio growth over two decades that rules out a bound
};

// f < g: some C2 keeps the ratio bounded by budget without growth at the top.
// Not-prec when every C2 shows monotone growth >= growth_limit over the top
// two decades; inconclusive otherwise.
ComparisonVerdict prec_check(const LogFn& f, const LogFn& g, double lo, double hi,
                             const CompareOptions& opt = {});
ComparisonVerdict sim_check(const LogFn& f, const LogFn& g, double lo, double hi,
                            const CompareOptions& opt = {});

// Numeric channels that bypass the closed forms.
double numeric_log_conjugate(const NFunction& phi, double log_s);  // log Phi*(e^{log_s})
double numeric_log_h(const NFunction& phi, double t);              // log (Phi*)^{-1}(e^t)

struct SuiteItem {
  std::string name;
  std::string description;
  double lo = 0, hi = 0;
  ComparisonVerdict verdict;
  // max |log f - log g| at C2 = 1; NaN when the item compares only shapes
  double max_abs_log_ratio = 0;
  double tolerance = 0;
  bool pass = false;
  std::vector<std::vector<double>> curve;  // t, log f, log g
  nlohmann::json to_json() const;
  std::string curve_csv() const;
};

struct SuiteReport {
  std::vector<SuiteItem> items;
  bool all_pass = false;
  double seconds = 0;
  nlohmann::json to_json() const;
};

SuiteReport verify_example_suite();

}  // namespace orlicz
