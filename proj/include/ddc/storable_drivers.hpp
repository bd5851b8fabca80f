#pragma once

#include <optional>
#include <string>

#include "ddc/models/storable.hpp"

namespace ddc {

struct StorableLoopConfig {
  InnerSolver inner = InnerSolver::ModelAdaptive;
  /// Inner valuation solve (residual sup-norm tolerance).
  SolverConfig solver{};
  /// Purchase-CCP sup-change tolerance of the inner policy iteration.
  double ccp_tol = 1e-5;
  int max_policy_steps = 100;
  /// Value-iteration stopping rule sup |V_{k+1} - V_k|.
  double vi_tol = 1e-8;
  int max_vi_iter = 1'000'000;
  /// Consumption updates allowed (the one-step driver is capped by max_vi_iter).
  int max_outer = 100;
  std::optional<ConsumptionFn> initial_consumption;
  std::optional<Ccp> initial_ccp;
  /// Purchase logits; overrides initial_ccp.
  std::optional<ConditionalValues> initial_values;
  std::optional<Vector> initial_value;
  std::optional<Vector> initial_y;
};

struct StorableSolution {
  std::string algorithm;
  Vector value;
  ConsumptionFn consumption;
  /// Purchase CCPs implied by (value, consumption).
  Ccp ccp;
  /// Purchase-choice values whose logit is `ccp`.
  ConditionalValues conditional_values;
  /// Last model-adaptive iterate (empty otherwise).
  Vector y;
  int outer_iterations = 0;
  long long inner_iterations = 0;
  double wall_time = 0.0;
};

/// Outer loop over the consumption rule with policy iteration over purchase
/// CCPs inside; stops when the integer consumption rule is unchanged.
StorableSolution storable_policy_loop(const StorableGoodsModel& model, const StorableLoopConfig& cfg = {});

/// Same outer loop with value iteration to convergence inside.
StorableSolution value_iteration_driver(const StorableGoodsModel& model, const StorableLoopConfig& cfg = {});

/// One Bellman step and one consumption update per iteration; stops when the
/// rule is unchanged and sup |V_{k+1} - V_k| <= cfg.vi_tol.
StorableSolution one_step_value_iteration_driver(const StorableGoodsModel& model, const StorableLoopConfig& cfg = {});

/// Logit purchase CCPs for given value and consumption rule.
Ccp storable_ccp(const StorableGoodsModel& model, const ConsumptionFn& c, const Vector& value);

}  // namespace ddc
