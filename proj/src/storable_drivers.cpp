#include "ddc/storable_drivers.hpp"

#include <chrono>

namespace ddc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

ConsumptionFn starting_rule(const StorableGoodsModel& model, const StorableLoopConfig& cfg) {
  return cfg.initial_consumption ? *cfg.initial_consumption : myopic_consumption(model);
}

}  // namespace

Ccp storable_ccp(const StorableGoodsModel& model, const ConsumptionFn& c, const Vector& value) {
  return logit_ccp(storable_conditional_values(model, c, value));
}

StorableSolution storable_policy_loop(const StorableGoodsModel& model, const StorableLoopConfig& cfg) {
  const auto start = Clock::now();
  StorableSolution out;
  out.algorithm = std::string("policy_") + to_string(cfg.inner);
  ConsumptionFn rule = starting_rule(model, cfg);

  PolicyIterationConfig pi;
  pi.inner = cfg.inner;
  pi.solver = cfg.solver;
  pi.ccp_tol = cfg.ccp_tol;
  pi.max_outer = cfg.max_policy_steps;
  pi.initial_ccp = cfg.initial_ccp;
  pi.initial_values = cfg.initial_values;
  if (cfg.inner == InnerSolver::ModelAdaptive && cfg.initial_y) pi.initial_guess = cfg.initial_y;
  if (cfg.inner == InnerSolver::SuccessiveApproximation && cfg.initial_value) pi.initial_guess = cfg.initial_value;

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    const FixedConsumptionModel fixed(model, rule);
    PolicyIterationResult r = policy_iteration(fixed, pi);
    out.inner_iterations += r.total_inner_iterations;
    ConsumptionFn next = consumption_update(model, r.value);

    pi.initial_values = r.conditional_values;
    if (cfg.inner == InnerSolver::ModelAdaptive) pi.initial_guess = r.y;
    if (cfg.inner == InnerSolver::SuccessiveApproximation) pi.initial_guess = r.value;
    out.value = std::move(r.value);
    out.y = std::move(r.y);
    if (next == rule) {
      out.outer_iterations = outer;
      out.consumption = std::move(rule);
      out.conditional_values = storable_conditional_values(model, out.consumption, out.value);
      out.ccp = logit_ccp(out.conditional_values);
      out.wall_time = seconds_since(start);
      return out;
    }
    rule = std::move(next);
  }
  throw ConvergenceError("storable_policy_loop: consumption rule still changing after " +
                             std::to_string(cfg.max_outer) + " updates",
                         out.value, 0.0);
}

StorableSolution value_iteration_driver(const StorableGoodsModel& model, const StorableLoopConfig& cfg) {
  const auto start = Clock::now();
  StorableSolution out;
  out.algorithm = "value_iteration";
  ConsumptionFn rule = starting_rule(model, cfg);
  Vector v = cfg.initial_value ? *cfg.initial_value : Vector::Zero(model.state_count());
  require_size("value_iteration_driver: initial value", model.state_count(), v.size());

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    double gap = 0.0;
    int it = 0;
    for (;;) {
      Vector next = storable_bellman(model, rule, v);
      gap = sup_norm(next - v);
      v.swap(next);
      ++it;
      if (gap <= cfg.vi_tol) break;
      if (it >= cfg.max_vi_iter) {
        throw ConvergenceError("value_iteration_driver: inner value iteration hit its cap", v, gap);
      }
    }
    out.inner_iterations += it;
    ConsumptionFn next = consumption_update(model, v);
    if (next == rule) {
      out.outer_iterations = outer;
      out.value = std::move(v);
      out.consumption = std::move(rule);
      out.conditional_values = storable_conditional_values(model, out.consumption, out.value);
      out.ccp = logit_ccp(out.conditional_values);
      out.wall_time = seconds_since(start);
      return out;
    }
    rule = std::move(next);
  }
  throw ConvergenceError("value_iteration_driver: consumption rule still changing after " +
                             std::to_string(cfg.max_outer) + " updates",
                         v, 0.0);
}

StorableSolution one_step_value_iteration_driver(const StorableGoodsModel& model, const StorableLoopConfig& cfg) {
  const auto start = Clock::now();
  StorableSolution out;
  out.algorithm = "one_step_value_iteration";
  ConsumptionFn rule = starting_rule(model, cfg);
  Vector v = cfg.initial_value ? *cfg.initial_value : Vector::Zero(model.state_count());
  require_size("one_step_value_iteration_driver: initial value", model.state_count(), v.size());

  double gap = 0.0;
  for (int it = 1; it <= cfg.max_vi_iter; ++it) {
    Vector next_v = storable_bellman(model, rule, v);
    gap = sup_norm(next_v - v);
    v.swap(next_v);
    ConsumptionFn next = consumption_update(model, v);
    const bool same = next == rule;
    rule = std::move(next);
    if (same && gap <= cfg.vi_tol) {
      out.outer_iterations = it;
      out.inner_iterations = it;
      out.value = std::move(v);
      out.consumption = std::move(rule);
      out.conditional_values = storable_conditional_values(model, out.consumption, out.value);
      out.ccp = logit_ccp(out.conditional_values);
      out.wall_time = seconds_since(start);
      return out;
    }
  }
  throw ConvergenceError("one_step_value_iteration_driver: no convergence after " + std::to_string(cfg.max_vi_iter) +
                             " iterations",
                         v, gap);
}

}  // namespace ddc
