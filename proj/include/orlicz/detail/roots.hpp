#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "orlicz/errors.hpp"

namespace orlicz::detail {

struct RelTol {
  double rel;
  bool operator()(double a, double b) const {
    return std::fabs(b - a) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
  }
};

// Root of a non-decreasing f inside [lo_limit, hi_limit]. The bracket grows
// from `guess` with doubling steps; infinite values at the bracket ends are
// bisected away before the TOMS 748 iteration starts.
template <class F>
double solve_increasing(F&& f, double guess, double step, double lo_limit, double hi_limit,
                        double rel_tol = 4 * std::numeric_limits<double>::epsilon(),
                        const char* what = "root") {
  guess = std::clamp(guess, lo_limit, hi_limit);
  double f0 = f(guess);
  if (std::isnan(f0)) throw EvaluationError(std::string(what) + ": NaN at start", guess);
  if (f0 == 0.0) return guess;
  double a = guess, b = guess, fa = f0, fb = f0;
  if (f0 < 0) {
    for (;;) {
      if (b >= hi_limit)
        throw DomainError(std::string(what) + ": no sign change below upper limit", hi_limit);
      a = b;
      fa = fb;
      b = std::min(b + step, hi_limit);
      step *= 2;
      fb = f(b);
      if (std::isnan(fb)) throw EvaluationError(std::string(what) + ": NaN", b);
      if (fb >= 0) break;
    }
  } else {
    for (;;) {
      if (a <= lo_limit)
        throw DomainError(std::string(what) + ": no sign change above lower limit", lo_limit);
      b = a;
      fb = fa;
      a = std::max(a - step, lo_limit);
      step *= 2;
      fa = f(a);
      if (std::isnan(fa)) throw EvaluationError(std::string(what) + ": NaN", a);
      if (fa <= 0) break;
    }
  }
  if (fa == 0) return a;
  if (fb == 0) return b;
  RelTol tol{rel_tol};
  while (!std::isfinite(fa) || !std::isfinite(fb)) {
    double m = 0.5 * (a + b);
    if (tol(a, b)) return m;
    double fm = f(m);
    if (std::isnan(fm)) throw EvaluationError(std::string(what) + ": NaN", m);
    if (fm == 0) return m;
    if (fm > 0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  std::uintmax_t iters = 300;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (r.first + r.second);
}

// Largest x in [a, b] with pred(x) false, given pred(a) false, pred(b) true
// and pred monotone. Plain bisection; tolerates infinities in pred.
template <class P>
double bisect_lower(P&& pred, double a, double b, double rel_tol = 1e-13) {
  RelTol tol{rel_tol};
  for (int i = 0; i < 400 && !tol(a, b); ++i) {
    double m = 0.5 * (a + b);
    if (pred(m))
      b = m;
    else
      a = m;
  }
  return a;
}

}  // namespace orlicz::detail
