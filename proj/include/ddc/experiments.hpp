#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddc/estimation.hpp"
#include "ddc/models/bus_engine.hpp"
#include "ddc/models/entry_exit.hpp"
#include "ddc/params.hpp"
#include "ddc/storable_drivers.hpp"

namespace ddc {

/// Discount factors swept by the entry/exit experiment.
inline const std::vector<double> kEntryExitBetas{0.95, 0.975, 0.98, 0.985, 0.99, 0.995, 0.999};

// ---- computations shared by the CLI, tests and acceptance suite ----

struct BusDemoResult {
  /// Integrated-Bellman fixed point (value iteration at 1e-10).
  Vector truth;
  /// Exact valuation of the true CCPs.
  Vector exact;
  /// V_k = (I - T*) y_k for k = 0..iterations.
  std::vector<Vector> iterates;
  std::vector<double> err_l2;
  std::vector<double> err_sup;
  SolverReport report;
};

BusDemoResult bus_demo(const BusEngineParams& params = {}, double tol = 1e-8);

struct EntryExitCell {
  Index m = 0;
  double beta = 0.0;
  Index states = 0;
  int outer_iterations = 0;
  std::vector<int> inner_per_outer;
  double avg_inner_iterations = 0.0;
  double seconds = 0.0;
  Ccp ccp;
  /// v(x,a) at the last improvement; its logit is `ccp`.
  ConditionalValues conditional_values;
};

struct EntryExitRun {
  InnerSolver inner = InnerSolver::ModelAdaptive;
  double ccp_tol = 1e-5;
  double inner_tol = 1e-7;
  /// Carry y (or V) across outer steps; otherwise every valuation starts at 0.
  bool warm_start = false;
};

/// Policy iteration from p0 = 1/2, y0 = 0 on the entry/exit model.
EntryExitCell entry_exit_cell(Index m, double beta, const EntryExitRun& run = {});

struct SolverComparison {
  Index m = 0;
  double beta = 0.0;
  int ma_iterations = 0;
  int sa_iterations = 0;
  double ma_seconds = 0.0;
  double sa_seconds = 0.0;
  /// Sup-norm equation residual of TD for degrees 1..max_degree.
  std::vector<double> td_residuals;
  double td_min_residual = 0.0;
  double td_seconds = 0.0;
};

/// Solves the valuation system at the logit CCPs of `true_values` with MA, SA
/// and TD. TD projects in L2 of the policy's stationary distribution.
SolverComparison entry_exit_solver_comparison(Index m, double beta, const ConditionalValues& true_values,
                                              double tol = 1e-7, int max_degree = 10);

struct StorableBenchmark {
  std::vector<StorableSolution> runs;
  /// Largest pairwise sup-norm gap between the runs' value functions.
  double max_value_gap = 0.0;
};

/// MA, SA and exact policy loops, value iteration and one-step value iteration.
StorableBenchmark storable_benchmark(const StorableGoodsModel& model, const StorableLoopConfig& base);

/// Dense random valuation system: rows of P are normalized uniforms, u ~ N(0, 1).
struct RandomInstance {
  DiscountedOperator op;
  Vector u;
};
RandomInstance random_instance(Index m, double beta, std::mt19937_64& rng);

struct McmcExperiment {
  StorableTheta truth;
  Panel panel;
  McmcResult chain;
};

/// 500 draws, 250 burn-in, adaptation kept on after burn-in.
inline McmcConfig desk_mcmc_config() {
  McmcConfig c;
  c.total_draws = 500;
  c.burn_in = 250;
  c.freeze_after_burn_in = false;
  return c;
}

struct McmcExperimentConfig {
  Index iv_bins = 3;
  int households = 50;
  int periods = 100;
  McmcConfig mcmc = desk_mcmc_config();
  std::uint64_t data_seed = 7;
  StorableTheta truth = default_storable_theta();
  /// Chain start; the truth when empty.
  std::optional<Vector> start;
  StorableLoopConfig solver{};
};

McmcExperiment mcmc_experiment(const McmcExperimentConfig& cfg);

// ---- CLI experiments ----

struct ExperimentConfig {
  std::string name;
  std::filesystem::path out_dir = "results";
  std::uint64_t seed = 1;
  std::vector<double> betas;
  std::vector<Index> ms;
  std::optional<double> tol;
  std::optional<InnerSolver> solver;
  bool huge = false;
  /// Model and run parameters from a key-value file.
  ParamFile params;
};

const std::vector<std::string>& experiment_names();

struct ExperimentOutcome {
  std::vector<std::filesystem::path> files;
  std::string summary;
};

/// Dispatches on cfg.name. Numeric results go to cfg.out_dir; wall times go
/// to cfg.out_dir/meta so the result files are reproducible byte for byte.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

ExperimentOutcome run_bus_demo(const ExperimentConfig& cfg);
ExperimentOutcome run_entry_exit(const ExperimentConfig& cfg);
ExperimentOutcome run_storable_solve(const ExperimentConfig& cfg);
ExperimentOutcome run_compare_solvers(const ExperimentConfig& cfg);
ExperimentOutcome run_mcmc_experiment(const ExperimentConfig& cfg);

/// Largest M run without --huge.
inline constexpr Index kEntryExitSafeM = 8;

}  // namespace ddc
