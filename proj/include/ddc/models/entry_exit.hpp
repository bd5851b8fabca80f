#pragma once

#include "ddc/discretization.hpp"
#include "ddc/policy.hpp"

namespace ddc {

struct EntryExitParams {
  /// Variable profit (theta0 + theta1 z1 + theta2 z2) exp(w).
  double vp0 = 0.5, vp1 = 1.0, vp2 = -1.0;
  /// Fixed cost theta0 + theta1 z3.
  double fc0 = 1.5, fc1 = 1.0;
  /// Entry cost (1 - a_prev)(theta0 + theta1 z4).
  double ec0 = 1.0, ec1 = 1.0;
  Ar1Spec z{0.0, 0.6, 1.0};
  Ar1Spec w{0.2, 0.6, 1.0};
  double beta = 0.95;
  Index m = 5;
  /// Tauchen truncation in stationary standard deviations.
  double width = 2.0;
};

/// pi(1, x) = VP - FC - EC; pi(0, x) = 0.
double entry_exit_flow_utility(double a_prev, double z1, double z2, double z3, double z4, double w, Index a,
                               const EntryExitParams& p = {});

/// Kernel on (lagged action, z) where next period's lag equals today's action
/// and z evolves by an action-independent chain:
///   (P v)(l, z) = sum_a p(a | l, z) (Pz v_a)(z).
class LaggedActionKernel final : public MarkovKernel {
 public:
  LaggedActionKernel(std::shared_ptr<const MarkovKernel> exogenous, Matrix probs);

  Index size() const override { return probs_.rows(); }
  void apply(const Vector& v, Vector& out) const override;
  void apply_transpose(const Vector& v, Vector& out) const override;
  using MarkovKernel::apply;
  using MarkovKernel::apply_transpose;

 private:
  std::shared_ptr<const MarkovKernel> exo_;
  Matrix probs_;
  Index n_;
  Index lags_;
};

/// Single-firm entry/exit with state (a_prev, z1, z2, z3, z4, w), 2 M^5 states,
/// lagged action outermost and w varying fastest.
class EntryExitModel : public DdcModel {
 public:
  explicit EntryExitModel(const EntryExitParams& p = {});

  const StateGrid& grid() const override { return grid_; }
  Index action_count() const override { return 2; }
  double beta() const override { return params_.beta; }
  double flow_utility(Index x, Index a) const override { return utilities_(x, a); }
  Matrix flow_utilities() const override { return utilities_; }
  Matrix expected_value(const Vector& value) const override;
  std::shared_ptr<const MarkovKernel> mixed_kernel(const Ccp& ccp) const override;

  const EntryExitParams& params() const { return params_; }
  /// Kronecker chain over (z1, z2, z3, z4, w).
  const std::shared_ptr<const KroneckerChain>& exogenous_kernel() const { return exo_; }
  Index exogenous_size() const { return exo_->size(); }
  /// Dense per-action kernels; only for small M.
  std::vector<TransitionKernel> dense_per_action(Index cap = kDenseStateCap) const;

 private:
  EntryExitParams params_;
  StateGrid grid_;
  std::shared_ptr<const KroneckerChain> exo_;
  Matrix utilities_;
};

/// Bytes a dense M^2 kernel for 2 M^5 states would need; printed before big runs.
double entry_exit_dense_bytes(Index m);

}  // namespace ddc
