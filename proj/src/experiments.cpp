#include "ddc/experiments.hpp"

#include <chrono>
#include <limits>
#include <iostream>
#include <sstream>

#include "ddc/csv_io.hpp"

namespace ddc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

std::filesystem::path prepare(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "meta");
  return dir;
}

}  // namespace

BusDemoResult bus_demo(const BusEngineParams& params, double tol) {
  const BusEngineModel model(params);
  BusDemoResult out;
  out.truth = solve_by_value_iteration(model, 1e-10);
  const Ccp ccp = policy_improvement(model, out.truth).first;
  const PolicyValuation pv = assemble_policy_valuation(model, ccp);
  out.exact = solve_exact(pv.op, pv.u);

  SolverConfig cfg;
  cfg.tol = tol;
  cfg.observer = [&](const IterationView& view) {
    Vector v = value_from_normal_iterate(pv.op, view.iterate);
    out.err_l2.push_back((v - out.exact).norm());
    out.err_sup.push_back(sup_norm(v - out.exact));
    out.iterates.push_back(std::move(v));
  };
  SolveResult r = solve_model_adaptive(pv.op, pv.u, cfg);
  out.report = std::move(r.report);
  return out;
}

EntryExitCell entry_exit_cell(Index m, double beta, const EntryExitRun& run) {
  EntryExitParams p;
  p.m = m;
  p.beta = beta;
  const EntryExitModel model(p);
  PolicyIterationConfig cfg;
  cfg.inner = run.inner;
  cfg.solver.tol = run.inner_tol;
  cfg.solver.record_history = false;
  cfg.ccp_tol = run.ccp_tol;
  cfg.warm_start = run.warm_start;
  const auto start = Clock::now();
  PolicyIterationResult r = policy_iteration(model, cfg);

  EntryExitCell cell;
  cell.m = m;
  cell.beta = beta;
  cell.states = model.state_count();
  cell.outer_iterations = r.outer_iterations;
  for (const auto& s : r.steps) cell.inner_per_outer.push_back(s.inner_iters);
  cell.avg_inner_iterations =
      static_cast<double>(r.total_inner_iterations) / static_cast<double>(std::max(1, r.outer_iterations));
  cell.seconds = seconds_since(start);
  cell.ccp = std::move(r.ccp);
  cell.conditional_values = std::move(r.conditional_values);
  return cell;
}

SolverComparison entry_exit_solver_comparison(Index m, double beta, const ConditionalValues& true_values, double tol,
                                              int max_degree) {
  EntryExitParams p;
  p.m = m;
  p.beta = beta;
  const EntryExitModel model(p);
  const PolicyValuation pv = assemble_policy_valuation_from_values(model, true_values, model.flow_utilities());
  SolverConfig cfg;
  cfg.tol = tol;
  cfg.record_history = false;

  SolverComparison out;
  out.m = m;
  out.beta = beta;
  const SolveResult ma = solve_model_adaptive(pv.op, pv.u, cfg);
  if (!ma.report.converged) throw ConvergenceError("model-adaptive solve did not converge", ma.value, ma.report.final_residual);
  out.ma_iterations = ma.report.iterations;
  out.ma_seconds = ma.report.wall_time;
  cfg.max_iter = 1'000'000;
  const SolveResult sa = solve_successive_approximation(pv.op, pv.u, cfg);
  if (!sa.report.converged)
    throw ConvergenceError("successive approximation did not converge", sa.value, sa.report.final_residual);
  out.sa_iterations = sa.report.iterations;
  out.sa_seconds = sa.report.wall_time;

  const auto start = Clock::now();
  const Vector mu = stationary_distribution(pv.op.kernel());
  out.td_min_residual = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= max_degree; ++d) {
    const TdResult td = solve_temporal_difference(pv.op, pv.u, polynomial_basis(model.grid(), d), mu);
    out.td_residuals.push_back(td.report.final_residual);
    out.td_min_residual = std::min(out.td_min_residual, td.report.final_residual);
  }
  out.td_seconds = seconds_since(start);
  return out;
}

StorableBenchmark storable_benchmark(const StorableGoodsModel& model, const StorableLoopConfig& base) {
  StorableBenchmark out;
  for (InnerSolver inner :
       {InnerSolver::ModelAdaptive, InnerSolver::SuccessiveApproximation, InnerSolver::Exact}) {
    StorableLoopConfig cfg = base;
    cfg.inner = inner;
    if (inner == InnerSolver::SuccessiveApproximation) {
      cfg.solver.max_iter = 10000000;
      cfg.solver.tol = std::min(cfg.solver.tol, 1e-10);
    }
    out.runs.push_back(storable_policy_loop(model, cfg));
  }
  out.runs.push_back(value_iteration_driver(model, base));
  out.runs.push_back(one_step_value_iteration_driver(model, base));
  for (size_t i = 0; i < out.runs.size(); ++i)
    for (size_t j = i + 1; j < out.runs.size(); ++j)
      out.max_value_gap = std::max(out.max_value_gap, sup_norm(out.runs[i].value - out.runs[j].value));
  return out;
}

RandomInstance random_instance(Index m, double beta, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix p(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) p(i, j) = unif(rng);
    p.row(i) /= p.row(i).sum();
  }
  Vector u(m);
  for (Index i = 0; i < m; ++i) u(i) = normal(rng);
  return RandomInstance{DiscountedOperator(beta, TransitionKernel(std::move(p))), std::move(u)};
}

McmcExperiment mcmc_experiment(const McmcExperimentConfig& cfg) {
  McmcExperiment out;
  out.truth = cfg.truth;
  const StorableGoodsModel model = build_desk_storable(cfg.iv_bins, 80, cfg.truth);
  const StorableSolution sol = storable_policy_loop(model, cfg.solver);
  out.panel = forward_simulate(model, sol.value, sol.consumption, cfg.households, cfg.periods, cfg.data_seed);
  const Vector start = cfg.start ? *cfg.start : Vector(cfg.truth);
  out.chain = run_mcmc(model, out.panel, start, cfg.mcmc, cfg.solver);
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"bus-demo", "entry-exit", "storable-solve", "compare-solvers",
                                              "mcmc-run"};
  return names;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  if (cfg.name == "bus-demo") return run_bus_demo(cfg);
  if (cfg.name == "entry-exit") return run_entry_exit(cfg);
  if (cfg.name == "storable-solve") return run_storable_solve(cfg);
  if (cfg.name == "compare-solvers") return run_compare_solvers(cfg);
  if (cfg.name == "mcmc-run") return run_mcmc_experiment(cfg);
  throw InvalidArgument("unknown experiment '" + cfg.name + "'");
}

ExperimentOutcome run_bus_demo(const ExperimentConfig& cfg) {
  const auto dir = prepare(cfg.out_dir);
  BusEngineParams p;
  p.theta1 = cfg.params.get_double("theta1", p.theta1);
  p.theta2 = cfg.params.get_double("theta2", p.theta2);
  p.rc = cfg.params.get_double("rc", p.rc);
  p.beta = cfg.betas.empty() ? cfg.params.get_double("beta", p.beta) : cfg.betas.front();
  const double tol = cfg.tol.value_or(1e-8);

  const auto start = Clock::now();
  const BusDemoResult r = bus_demo(p, tol);
  const double elapsed = seconds_since(start);

  ExperimentOutcome out;
  {
    CsvWriter w(dir / "bus_iterates.csv", {"iter", "index", "mileage", "value", "exact"});
    for (size_t k = 0; k < r.iterates.size(); ++k) {
      for (Index i = 0; i < r.exact.size(); ++i) {
        w << static_cast<long long>(k) << static_cast<long long>(i) << p.step * static_cast<double>(i)
          << r.iterates[k](i) << r.exact(i);
        w.end_row();
      }
    }
  }
  {
    CsvWriter w(dir / "bus_trace.csv", {"iter", "res_sup", "res_l2", "err_l2", "err_sup", "alpha", "beta_cg"});
    for (size_t k = 0; k < r.report.history.size(); ++k) {
      const auto& h = r.report.history[k];
      w << h.iter << h.res_sup << h.res_l2 << r.err_l2[k] << r.err_sup[k] << h.alpha << h.beta_cg;
      w.end_row();
    }
  }
  {
    CsvWriter w(dir / "meta" / "bus_demo_timing.csv", {"item", "seconds"});
    w << std::string("total") << elapsed;
    w.end_row();
    w << std::string("model_adaptive") << r.report.wall_time;
    w.end_row();
  }
  out.files = {dir / "bus_iterates.csv", dir / "bus_trace.csv", dir / "meta" / "bus_demo_timing.csv"};
  std::ostringstream s;
  s << "bus-demo: model-adaptive converged=" << (r.report.converged ? "yes" : "no") << " in "
    << r.report.iterations << " iterations, residual " << r.report.final_residual;
  out.summary = s.str();
  if (!r.report.converged) throw ConvergenceError(out.summary, r.iterates.back(), r.report.final_residual);
  return out;
}

ExperimentOutcome run_entry_exit(const ExperimentConfig& cfg) {
  const auto dir = prepare(cfg.out_dir);
  const std::vector<double> betas = cfg.betas.empty() ? kEntryExitBetas : cfg.betas;
  const std::vector<Index> ms = cfg.ms.empty() ? std::vector<Index>{5} : cfg.ms;
  EntryExitRun run;
  run.inner = cfg.solver.value_or(InnerSolver::ModelAdaptive);
  run.inner_tol = cfg.tol.value_or(1e-7);
  run.ccp_tol = cfg.params.get_double("ccp_tol", 1e-5);
  run.warm_start = cfg.params.get_bool("warm_start", false);
  const int max_degree = static_cast<int>(cfg.params.get_int("td_max_degree", 10));
  const Index compare_m = cfg.params.get_int("compare_m", 5);

  for (Index m : ms) {
    if (m < 2) throw InvalidArgument("entry-exit: M must be >= 2");
    const double states = 2.0 * std::pow(static_cast<double>(m), 5);
    // Roughly a dozen state-sized vectors plus the CCP table are live at once.
    const double working = states * sizeof(double) * 16.0;
    if (m > kEntryExitSafeM) {
      std::cerr << "entry-exit: M=" << m << " has " << static_cast<long long>(states) << " states; about "
                << working / 1e6 << " MB working memory (a dense kernel would need "
                << entry_exit_dense_bytes(m) / 1e9 << " GB)\n";
      if (!cfg.huge) throw InvalidArgument("entry-exit: M > " + std::to_string(kEntryExitSafeM) + " requires --huge");
    }
  }

  ExperimentOutcome out;
  std::vector<EntryExitCell> cells;
  {
    CsvWriter w(dir / "entry_exit_policy.csv",
                {"m", "beta", "states", "solver", "outer_iterations", "avg_inner_iterations", "inner_per_outer"});
    for (Index m : ms) {
      for (double beta : betas) {
        cells.push_back(entry_exit_cell(m, beta, run));
        const auto& c = cells.back();
        w << static_cast<long long>(m) << beta << static_cast<long long>(c.states) << std::string(to_string(run.inner))
          << c.outer_iterations << c.avg_inner_iterations << join_ints(c.inner_per_outer);
        w.end_row();
      }
    }
  }
  std::vector<SolverComparison> comps;
  for (const auto& c : cells)
    if (c.m == compare_m) comps.push_back(entry_exit_solver_comparison(c.m, c.beta, c.conditional_values, run.inner_tol, max_degree));
  {
    CsvWriter w(dir / "entry_exit_solvers.csv", {"m", "beta", "ma_iterations", "sa_iterations", "td_min_residual"});
    for (const auto& c : comps) {
      w << static_cast<long long>(c.m) << c.beta << c.ma_iterations << c.sa_iterations << c.td_min_residual;
      w.end_row();
    }
  }
  {
    CsvWriter w(dir / "entry_exit_td.csv", {"m", "beta", "degree", "residual"});
    for (const auto& c : comps) {
      for (size_t d = 0; d < c.td_residuals.size(); ++d) {
        w << static_cast<long long>(c.m) << c.beta << static_cast<int>(d + 1) << c.td_residuals[d];
        w.end_row();
      }
    }
  }
  {
    CsvWriter w(dir / "meta" / "entry_exit_timing.csv", {"m", "beta", "item", "seconds"});
    for (const auto& c : cells) {
      w << static_cast<long long>(c.m) << c.beta << std::string("policy_iteration") << c.seconds;
      w.end_row();
    }
    for (const auto& c : comps) {
      w << static_cast<long long>(c.m) << c.beta << std::string("model_adaptive") << c.ma_seconds;
      w.end_row();
      w << static_cast<long long>(c.m) << c.beta << std::string("successive_approximation") << c.sa_seconds;
      w.end_row();
      w << static_cast<long long>(c.m) << c.beta << std::string("temporal_difference") << c.td_seconds;
      w.end_row();
    }
  }
  out.files = {dir / "entry_exit_policy.csv", dir / "entry_exit_solvers.csv", dir / "entry_exit_td.csv",
               dir / "meta" / "entry_exit_timing.csv"};
  std::ostringstream s;
  s << "entry-exit: " << cells.size() << " policy-iteration cells, " << comps.size() << " solver comparisons";
  out.summary = s.str();
  return out;
}

namespace {

StorableLoopConfig storable_config(const ExperimentConfig& cfg) {
  StorableLoopConfig c;
  c.solver.tol = cfg.tol.value_or(cfg.params.get_double("inner_tol", 1e-8));
  c.solver.record_history = false;
  c.ccp_tol = cfg.params.get_double("ccp_tol", 1e-6);
  c.vi_tol = cfg.params.get_double("vi_tol", 1e-10);
  return c;
}

StorableTheta storable_theta(const ParamFile& p) {
  StorableTheta t = default_storable_theta();
  for (int k = 0; k < 4; ++k) t(k) = p.get_double("theta" + std::to_string(k + 1), t(k));
  return t;
}

}  // namespace

ExperimentOutcome run_storable_solve(const ExperimentConfig& cfg) {
  const auto dir = prepare(cfg.out_dir);
  const Index bins = cfg.params.get_int("iv_bins", 3);
  const int i_max = static_cast<int>(cfg.params.get_int("i_max", 80));
  const double beta = cfg.betas.empty() ? cfg.params.get_double("beta", 0.99) : cfg.betas.front();
  const StorableGoodsModel model = build_desk_storable(bins, i_max, storable_theta(cfg.params), {}, beta);
  const StorableBenchmark b = storable_benchmark(model, storable_config(cfg));

  ExperimentOutcome out;
  {
    CsvWriter w(dir / "storable_solve.csv",
                {"algorithm", "states", "outer_iterations", "inner_iterations", "gap_to_first"});
    for (const auto& r : b.runs) {
      w << r.algorithm << static_cast<long long>(model.state_count()) << r.outer_iterations << r.inner_iterations
        << sup_norm(r.value - b.runs.front().value);
      w.end_row();
    }
  }
  {
    CsvWriter w(dir / "meta" / "storable_solve_timing.csv", {"algorithm", "seconds"});
    for (const auto& r : b.runs) {
      w << r.algorithm << r.wall_time;
      w.end_row();
    }
  }
  out.files = {dir / "storable_solve.csv", dir / "meta" / "storable_solve_timing.csv"};
  std::ostringstream s;
  s << "storable-solve: " << model.state_count() << " states, max value gap " << b.max_value_gap;
  out.summary = s.str();
  return out;
}

ExperimentOutcome run_compare_solvers(const ExperimentConfig& cfg) {
  const auto dir = prepare(cfg.out_dir);
  const std::vector<double> betas = cfg.betas.empty() ? std::vector<double>{0.5, 0.9, 0.99} : cfg.betas;
  const std::vector<Index> ms = cfg.ms.empty() ? std::vector<Index>{50, 100, 200} : cfg.ms;
  const double tol = cfg.tol.value_or(1e-8);
  const int reps = static_cast<int>(cfg.params.get_int("instances", 5));
  std::mt19937_64 rng(cfg.seed);

  ExperimentOutcome out;
  CsvWriter w(dir / "compare_solvers.csv", {"instance", "m", "beta", "solver", "iterations", "sup_error"});
  CsvWriter t(dir / "meta" / "compare_solvers_timing.csv", {"instance", "solver", "seconds"});
  int instance = 0;
  double worst = 0.0;
  for (Index m : ms) {
    for (double beta : betas) {
      for (int rep = 0; rep < reps; ++rep, ++instance) {
        const RandomInstance inst = random_instance(m, beta, rng);
        const Vector exact = solve_exact(inst.op, inst.u);
        SolverConfig sc;
        sc.tol = tol;
        sc.record_history = false;
        const SolveResult ma = solve_model_adaptive(inst.op, inst.u, sc);
        sc.max_iter = 10'000'000;
        const SolveResult sa = solve_successive_approximation(inst.op, inst.u, sc);
        const TdResult td = solve_temporal_difference(inst.op, inst.u, Matrix::Identity(m, m));
        const std::pair<const char*, const SolverReport*> rows[] = {
            {"model_adaptive", &ma.report}, {"successive_approximation", &sa.report}, {"temporal_difference", &td.report}};
        const Vector* values[] = {&ma.value, &sa.value, &td.value};
        for (int k = 0; k < 3; ++k) {
          const double err = sup_norm(*values[k] - exact);
          if (k != 1) worst = std::max(worst, err);
          w << instance << static_cast<long long>(m) << beta << std::string(rows[k].first) << rows[k].second->iterations
            << err;
          w.end_row();
          t << instance << std::string(rows[k].first) << rows[k].second->wall_time;
          t.end_row();
        }
      }
    }
  }
  out.files = {dir / "compare_solvers.csv", dir / "meta" / "compare_solvers_timing.csv"};
  std::ostringstream s;
  s << "compare-solvers: " << instance << " instances, worst model-adaptive/TD error " << worst;
  out.summary = s.str();
  return out;
}

ExperimentOutcome run_mcmc_experiment(const ExperimentConfig& cfg) {
  const auto dir = prepare(cfg.out_dir);
  McmcExperimentConfig mc;
  mc.iv_bins = cfg.params.get_int("iv_bins", 3);
  mc.households = static_cast<int>(cfg.params.get_int("households", 50));
  mc.periods = static_cast<int>(cfg.params.get_int("periods", 100));
  mc.mcmc.total_draws = static_cast<int>(cfg.params.get_int("draws", 500));
  mc.mcmc.burn_in = static_cast<int>(cfg.params.get_int("burn_in", 250));
  mc.mcmc.seed = cfg.seed;
  mc.mcmc.freeze_after_burn_in = cfg.params.get_bool("freeze_after_burn_in", false);
  mc.data_seed = static_cast<std::uint64_t>(cfg.params.get_int("data_seed", 7));
  mc.truth = storable_theta(cfg.params);
  mc.solver.solver.tol = cfg.tol.value_or(1e-8);
  mc.solver.solver.record_history = false;

  const auto start = Clock::now();
  const McmcExperiment r = mcmc_experiment(mc);
  const double elapsed = seconds_since(start);
  const StorableGoodsModel model = build_desk_storable(mc.iv_bins, 80, mc.truth);

  ExperimentOutcome out;
  write_chain_csv(dir / "chain.csv", r.chain);
  write_panel_csv(dir / "panel.csv", r.panel, model);
  {
    CsvWriter w(dir / "recovery.csv", {"parameter", "truth", "posterior_mean", "posterior_sd", "abs_z"});
    for (int k = 0; k < 4; ++k) {
      const double sd = r.chain.posterior_sd(k);
      w << "theta" + std::to_string(k + 1) << r.truth(k) << r.chain.posterior_mean(k) << sd
        << std::abs(r.chain.posterior_mean(k) - r.truth(k)) / sd;
      w.end_row();
    }
  }
  {
    CsvWriter w(dir / "mcmc_summary.csv", {"draws", "burn_in", "acceptance_rate"});
    w << mc.mcmc.total_draws << mc.mcmc.burn_in << r.chain.acceptance_rate;
    w.end_row();
  }
  {
    CsvWriter w(dir / "meta" / "mcmc_timing.csv", {"item", "seconds"});
    w << std::string("total") << elapsed;
    w.end_row();
  }
  out.files = {dir / "chain.csv", dir / "panel.csv", dir / "recovery.csv", dir / "mcmc_summary.csv",
               dir / "meta" / "mcmc_timing.csv"};
  std::ostringstream s;
  s << "mcmc-run: acceptance " << r.chain.acceptance_rate << ", posterior mean " << r.chain.posterior_mean.transpose();
  out.summary = s.str();
  return out;
}

}  // namespace ddc
