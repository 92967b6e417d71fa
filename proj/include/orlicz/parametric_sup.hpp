#pragma once

#include <functional>
#include <vector>

namespace orlicz {

// One stretch of the parameter line. eval(theta, A, B) fills the log
// coefficients of the affine piece e^A (y - e^B).
struct SupSegment {
  double lo, hi, step;
  std::function<void(double theta, double& A, double& B)> eval;
};

// sup over theta of e^{A(theta)} (y - e^{B(theta)}), together with the value
// 0, evaluated in log form. Works for non-convex primal functions: the
// coarse grid is scanned completely, then refined around the best node.
class ParametricSup {
 public:
  explicit ParametricSup(std::vector<SupSegment> segments, int refine_rounds = 3);

  // log of the supremum at y = e^{ly}; -inf when the supremum is 0
  double log_sup(double ly) const;
  // parameter of the best piece at y = e^{ly}; NaN when the supremum is 0
  double argmax(double ly) const;
  std::size_t size() const { return theta_.size(); }

 private:
  std::vector<SupSegment> segs_;
  int rounds_;
  std::vector<double> theta_, A_, B_;
  std::vector<int> seg_;
  std::vector<std::size_t> order_;  // nodes by decreasing A

  struct Best {
    double value;
    double theta;
    int seg;
  };
  Best search(double ly) const;
};

}  // namespace orlicz
