#include "orlicz/parametric_sup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orlicz/errors.hpp"

namespace orlicz {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^A (e^ly - e^B))
inline double piece(double A, double B, double ly) {
  if (!(B < ly) || std::isnan(A)) return kNegInf;
  return A + ly + std::log1p(-std::exp(B - ly));
}

}  // namespace

ParametricSup::ParametricSup(std::vector<SupSegment> segments, int refine_rounds)
    : segs_(std::move(segments)), rounds_(refine_rounds) {
  if (segs_.empty()) throw ConfigError("ParametricSup needs at least one segment");
  for (int s = 0; s < int(segs_.size()); ++s) {
    const auto& g = segs_[s];
    if (!(g.hi > g.lo) || !(g.step > 0) || !g.eval) throw ConfigError("ParametricSup: bad segment");
    auto m = std::size_t(std::ceil((g.hi - g.lo) / g.step));
    for (std::size_t i = 0; i <= m; ++i) {
      double th = std::min(g.lo + double(i) * g.step, g.hi);
      double A, B;
      g.eval(th, A, B);
      theta_.push_back(th);
      A_.push_back(A);
      B_.push_back(B);
      seg_.push_back(s);
    }
  }
  for (std::size_t i = 0; i < A_.size(); ++i)
    if (!std::isnan(A_[i]) && !std::isnan(B_[i]) && A_[i] > -std::numeric_limits<double>::infinity())
      order_.push_back(i);
  std::stable_sort(order_.begin(), order_.end(),
                   [this](std::size_t a, std::size_t b) { return A_[a] > A_[b]; });
}

ParametricSup::Best ParametricSup::search(double ly) const {
  Best best{kNegInf, std::numeric_limits<double>::quiet_NaN(), -1};
  for (std::size_t i : order_) {
    // A + ly bounds the piece from above and decreases along order_
    if (!(A_[i] + ly > best.value)) break;
    if (!(B_[i] < ly)) continue;
    double v = piece(A_[i], B_[i], ly);
    if (v > best.value) best = {v, theta_[i], seg_[i]};
  }
  if (best.seg < 0) return best;
  double h = segs_[best.seg].step;
  for (int r = 0; r < rounds_; ++r) {
    const auto& g = segs_[best.seg];
    double c = best.theta, hs = h / 10;
    for (int j = -10; j <= 10; ++j) {
      double th = c + j * hs;
      if (th < g.lo || th > g.hi || j == 0) continue;
      double A, B;
      g.eval(th, A, B);
      double v = piece(A, B, ly);
      if (v > best.value) best = {v, th, best.seg};
    }
    h = hs;
  }
  return best;
}

double ParametricSup::log_sup(double ly) const { return search(ly).value; }

double ParametricSup::argmax(double ly) const { return search(ly).theta; }

}  // namespace orlicz
