#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddc/discounted_operator.hpp"
#include "ddc/state_grid.hpp"

namespace ddc {

/// Snapshot passed to SolverConfig::observer after each iteration.
/// For the model-adaptive solver `iterate` is y_k; for successive
/// approximation it is V_k. `residual` is r_k in both cases.
struct IterationView {
  int iteration;
  const Vector& iterate;
  const Vector& residual;
};

struct SolverConfig {
  double tol = 1e-8;
  Norm tol_norm = Norm::Sup;
  int max_iter = 100'000;
  std::optional<Vector> initial_y;
  std::optional<Vector> initial_v;
  bool record_history = true;
  /// Replace the recursive residual by u - A y every this many iterations (0 disables).
  int recompute_every = 50;
  std::function<void(const IterationView&)> observer;
};

struct IterationRecord {
  int iter = 0;
  double res_sup = 0.0;
  double res_l2 = 0.0;
  double alpha = 0.0;
  double beta_cg = 0.0;
  double elapsed_s = 0.0;
};

struct SolverReport {
  std::string solver;
  int iterations = 0;
  std::vector<IterationRecord> history;
  /// Matrix-vector products spent inside the iteration loop.
  long long matvec_count = 0;
  /// Setup, periodic residual recomputation and final back-substitution.
  long long extra_matvecs = 0;
  long long recompute_matvecs = 0;
  bool converged = false;
  double final_residual = 0.0;
  double wall_time = 0.0;
};

struct SolveResult {
  Vector value;
  /// Model-adaptive: the normal-equation iterate y; empty for other solvers.
  Vector y;
  SolverReport report;
};

struct TdResult {
  Vector value;
  /// Coefficients on the caller's basis columns.
  Vector coefficients;
  SolverReport report;
};

/// Conjugate gradients on (I - T)(I - T*) y = u, returning V = (I - T*) y.
///
/// The sieve space after k steps is span{r_0, ..., r_{k-1}}; each step costs two
/// matvecs (one for w = (I - T*) s, one for (I - T) w, which feeds both alpha and
/// the recursive residual update). Stops when the residual, measured in
/// cfg.tol_norm, drops to cfg.tol. Since r = u - (I - T) V, the stopping residual
/// is also the residual of the original valuation equation.
SolveResult solve_model_adaptive(const DiscountedOperator& op, const Vector& u, const SolverConfig& cfg = {});

/// V_{k+1} = u + T V_k until ||V_{k+1} - V_k|| <= tol.
SolveResult solve_successive_approximation(const DiscountedOperator& op, const Vector& u,
                                           const SolverConfig& cfg = {});

/// Projected fixed point V = Pi_S (u + T V) with S = span(basis) and
/// projection weighted by `weights` (uniform when empty).
TdResult solve_temporal_difference(const DiscountedOperator& op, const Vector& u, const Matrix& basis,
                                   const Vector& weights = {});

inline constexpr Index kExactSolveCap = 50'000;

/// Dense LU with partial pivoting on (I - beta P) V = u.
Vector solve_exact(const DiscountedOperator& op, const Vector& u, Index cap = kExactSolveCap);

/// V = (I - T*) y.
Vector value_from_normal_iterate(const DiscountedOperator& op, const Vector& y);

/// Intercept, per-coordinate monomials up to `degree` and pairwise products of
/// the linear terms. Coordinates are affinely rescaled to [-1, 1] (span
/// preserving); a coordinate with n distinct values contributes at most n - 1 powers.
Matrix polynomial_basis(const StateGrid& grid, int degree, bool interactions = true);

/// `iter,res_sup,res_l2,alpha,beta_cg,elapsed_s`
void write_trace_csv(const std::filesystem::path& path, const SolverReport& report);

}  // namespace ddc
