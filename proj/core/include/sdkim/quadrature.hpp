#pragma once

#include "sdkim/types.hpp"

namespace sdkim {

/// Gauss-Hermite rule for the standard normal measure Dx, so that
/// expect(f) ~= E[f(x)], x ~ N(0, 1). Nodes come from the Golub-Welsch
/// eigenproblem; weights sum to one.
class GaussHermite {
 public:
  explicit GaussHermite(int nodes = 40);

  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }

  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (Index k = 0; k < nodes_.size(); ++k) acc += weights_(k) * f(nodes_(k));
    return acc;
  }

 private:
  Vector nodes_;
  Vector weights_;
};

}  // namespace sdkim
