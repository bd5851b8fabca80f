#pragma once

#include "ddc/linalg.hpp"

namespace ddc {

/// Conditional choice probabilities p(a|x), one row per state.
///
/// Rows must lie on the simplex. Zero entries are allowed here (degenerate
/// policies are legitimate inputs to kernel mixing); operations that take
/// log p check strict positivity themselves.
class Ccp {
 public:
  Ccp() = default;
  explicit Ccp(Matrix probs, double tol = 1e-12);

  static Ccp uniform(Index states, Index actions);

  Index states() const { return probs_.rows(); }
  Index actions() const { return probs_.cols(); }
  const Matrix& probs() const { return probs_; }
  double operator()(Index x, Index a) const { return probs_(x, a); }

 private:
  Matrix probs_;
};

/// Conditional values v(x,a), one row per state.
using ConditionalValues = Matrix;

}  // namespace ddc
