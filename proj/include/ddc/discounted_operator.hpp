#pragma once

#include <memory>
#include <span>

#include "ddc/ccp.hpp"
#include "ddc/transition_kernel.hpp"

namespace ddc {

/// T v = beta * P v for a row-stochastic P and 0 < beta < 1.
class DiscountedOperator {
 public:
  DiscountedOperator(double beta, std::shared_ptr<const MarkovKernel> kernel);
  DiscountedOperator(double beta, TransitionKernel kernel);

  double beta() const { return beta_; }
  Index size() const { return kernel_->size(); }
  const MarkovKernel& kernel() const { return *kernel_; }
  const std::shared_ptr<const MarkovKernel>& kernel_ptr() const { return kernel_; }

  /// I - beta P as a dense matrix.
  Matrix dense_system() const;

 private:
  double beta_;
  std::shared_ptr<const MarkovKernel> kernel_;
};

/// beta * P v. One matvec.
Vector apply_T(const DiscountedOperator& op, const Vector& v);

/// beta * P^T v. One matvec.
Vector apply_T_adjoint(const DiscountedOperator& op, const Vector& v);

/// (I - T)(I - T*) y. Two matvecs.
Vector apply_normal(const DiscountedOperator& op, const Vector& y);
inline constexpr int kNormalMatvecs = 2;

/// (I - T) v: the policy-valuation residual map.
Vector apply_system(const DiscountedOperator& op, const Vector& v);

/// mu with mu^T P = mu^T by power iteration from the uniform distribution.
/// Throws ConvergenceError (carrying the last iterate and L1 gap) past `max_iter`.
Vector stationary_distribution(const MarkovKernel& kernel, double tol = 1e-12,
                               int max_iter = 100'000);

/// Row i of the result is sum_a p(a|x_i) * row i of per_action[a].
TransitionKernel mix_kernel(std::span<const TransitionKernel> per_action, const Ccp& ccp);

}  // namespace ddc
