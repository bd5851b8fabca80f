#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ddc/ccp.hpp"
#include "ddc/discounted_operator.hpp"
#include "ddc/solvers.hpp"
#include "ddc/state_grid.hpp"

namespace ddc {

/// Euler-Mascheroni constant (mean of a standard Gumbel shock).
inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Infinite-horizon logit dynamic discrete choice model.
class DdcModel {
 public:
  virtual ~DdcModel() = default;

  virtual const StateGrid& grid() const = 0;
  virtual Index action_count() const = 0;
  virtual double beta() const = 0;
  virtual double flow_utility(Index x, Index a) const = 0;

  /// M x A table of u(x,a).
  virtual Matrix flow_utilities() const;

  /// M x A table of E[V(x') | x, a].
  virtual Matrix expected_value(const Vector& value) const = 0;

  /// f(x'|x) = sum_a p(a|x) f(x'|x,a).
  virtual std::shared_ptr<const MarkovKernel> mixed_kernel(const Ccp& ccp) const = 0;

  Index state_count() const { return grid().count(); }
};

/// A model whose per-action transitions are stored as dense kernels.
class DenseDdcModel : public DdcModel {
 public:
  DenseDdcModel(StateGrid grid, double beta, Matrix utilities, std::vector<TransitionKernel> per_action);

  const StateGrid& grid() const override { return grid_; }
  Index action_count() const override { return utilities_.cols(); }
  double beta() const override { return beta_; }
  double flow_utility(Index x, Index a) const override { return utilities_(x, a); }
  Matrix flow_utilities() const override { return utilities_; }
  Matrix expected_value(const Vector& value) const override;
  std::shared_ptr<const MarkovKernel> mixed_kernel(const Ccp& ccp) const override;

  const std::vector<TransitionKernel>& per_action_kernels() const { return per_action_; }

 private:
  StateGrid grid_;
  double beta_;
  Matrix utilities_;
  std::vector<TransitionKernel> per_action_;
};

struct PolicyValuation {
  Vector u;
  DiscountedOperator op;
};

/// u(x) = sum_a p(a|x) [u(x,a) + kappa - log p(a|x)] and T built from the mixed kernel.
PolicyValuation assemble_policy_valuation(const DdcModel& model, const Ccp& ccp);
PolicyValuation assemble_policy_valuation(const DdcModel& model, const Ccp& ccp, const Matrix& flow);

/// Same system for the logit policy implied by conditional values v. The
/// entropy term uses log p = v - logsumexp(v), so probabilities that underflow
/// to zero contribute exactly zero instead of raising.
PolicyValuation assemble_policy_valuation_from_values(const DdcModel& model, const ConditionalValues& v,
                                                      const Matrix& flow);

/// Logit CCPs and conditional values v(x,a) = u(x,a) + beta E[V | x, a].
std::pair<Ccp, ConditionalValues> policy_improvement(const DdcModel& model, const Vector& value);
std::pair<Ccp, ConditionalValues> policy_improvement(const DdcModel& model, const Vector& value,
                                                     const Matrix& flow);

/// Row-wise softmax with max subtraction.
Ccp logit_ccp(const ConditionalValues& v);

/// V(x) = v(x,a) - log p(a|x) + kappa.
Vector hotz_miller_invert(const ConditionalValues& v, const Ccp& ccp, Index action);

enum class InnerSolver { ModelAdaptive, SuccessiveApproximation, Exact };

const char* to_string(InnerSolver s);
InnerSolver parse_inner_solver(const std::string& name);

struct PolicyIterationConfig {
  InnerSolver inner = InnerSolver::ModelAdaptive;
  SolverConfig solver{};
  double ccp_tol = 1e-5;
  int max_outer = 100;
  bool warm_start = true;
  std::optional<Ccp> initial_ccp;
  /// Starting policy given by its logits; overrides initial_ccp. Probabilities
  /// that underflow to zero still get a finite entropy term this way.
  std::optional<ConditionalValues> initial_values;
  /// Seeds the first inner solve (y for model-adaptive, V for successive approximation).
  std::optional<Vector> initial_guess;
};

struct OuterStep {
  int outer_iter = 0;
  int inner_iters = 0;
  long long inner_matvecs = 0;
  double ccp_change_sup = 0.0;
  double equation_residual = 0.0;
  double elapsed_s = 0.0;
};

struct PolicyIterationResult {
  Vector value;
  /// Policy whose valuation is `value`.
  Ccp evaluated_ccp;
  /// Improvement of `evaluated_ccp`.
  Ccp ccp;
  ConditionalValues conditional_values;
  /// Last model-adaptive iterate, for warm starts.
  Vector y;
  std::vector<OuterStep> steps;
  int outer_iterations = 0;
  long long total_inner_iterations = 0;
  double wall_time = 0.0;
};

/// Alternates policy valuation and logit policy improvement until
/// sup |p_{i+1} - p_i| <= cfg.ccp_tol. Starts from the uniform policy unless
/// cfg.initial_values or cfg.initial_ccp is given. Throws ConvergenceError when the inner solver
/// fails or the outer loop exceeds cfg.max_outer.
PolicyIterationResult policy_iteration(const DdcModel& model, const PolicyIterationConfig& cfg = {});

/// Solves one policy-valuation system with the chosen solver.
SolveResult solve_valuation(InnerSolver inner, const DiscountedOperator& op, const Vector& u,
                            const SolverConfig& cfg);

/// `outer_iter,inner_iters,inner_matvecs,ccp_change_sup,elapsed_s`
void write_driver_report_csv(const std::filesystem::path& path, const std::vector<OuterStep>& steps);

/// Integrated-Bellman value iteration V <- log sum_a exp(u + beta E V) + kappa.
/// Used as the truth oracle for small models.
Vector solve_by_value_iteration(const DdcModel& model, double tol = 1e-10, int max_iter = 1'000'000);

}  // namespace ddc
