#include "ddc/policy.hpp"

#include <chrono>

#include "ddc/csv_io.hpp"

namespace ddc {

namespace {

using Clock = std::chrono::steady_clock;

}  // namespace

Matrix DdcModel::flow_utilities() const {
  const Index m = state_count();
  const Index a_count = action_count();
  Matrix u(m, a_count);
  for (Index x = 0; x < m; ++x)
    for (Index a = 0; a < a_count; ++a) u(x, a) = flow_utility(x, a);
  return u;
}

DenseDdcModel::DenseDdcModel(StateGrid grid, double beta, Matrix utilities,
                             std::vector<TransitionKernel> per_action)
    : grid_(std::move(grid)), beta_(beta), utilities_(std::move(utilities)), per_action_(std::move(per_action)) {
  if (!(beta_ > 0.0 && beta_ < 1.0)) throw InvalidArgument("DenseDdcModel: beta must lie in (0,1)");
  require_size("DenseDdcModel: utility rows", grid_.count(), utilities_.rows());
  require_size("DenseDdcModel: kernels per action", utilities_.cols(), static_cast<Index>(per_action_.size()));
  for (const auto& k : per_action_) require_size("DenseDdcModel: kernel size", grid_.count(), k.size());
  if (!utilities_.allFinite()) throw InvalidArgument("DenseDdcModel: non-finite flow utility");
}

Matrix DenseDdcModel::expected_value(const Vector& value) const {
  require_size("DenseDdcModel::expected_value", grid_.count(), value.size());
  Matrix ev(grid_.count(), action_count());
  for (Index a = 0; a < action_count(); ++a) ev.col(a) = per_action_[static_cast<size_t>(a)].matrix() * value;
  return ev;
}

std::shared_ptr<const MarkovKernel> DenseDdcModel::mixed_kernel(const Ccp& ccp) const {
  return std::make_shared<const TransitionKernel>(mix_kernel(per_action_, ccp));
}

PolicyValuation assemble_policy_valuation(const DdcModel& model, const Ccp& ccp) {
  return assemble_policy_valuation(model, ccp, model.flow_utilities());
}

PolicyValuation assemble_policy_valuation(const DdcModel& model, const Ccp& ccp, const Matrix& flow) {
  require_size("assemble_policy_valuation: ccp states", model.state_count(), ccp.states());
  require_size("assemble_policy_valuation: ccp actions", model.action_count(), ccp.actions());
  const Matrix& p = ccp.probs();
  for (Index x = 0; x < p.rows(); ++x) {
    for (Index a = 0; a < p.cols(); ++a) {
      if (!(p(x, a) > 0.0)) {
        throw InvalidArgument("assemble_policy_valuation: p(a|x) <= 0 at (x=" + std::to_string(x) +
                              ", a=" + std::to_string(a) + ")");
      }
    }
  }
  const Vector u =
      (p.array() * (flow.array() + kEulerGamma - p.array().max(1e-300).log())).rowwise().sum().matrix();
  return PolicyValuation{u, DiscountedOperator(model.beta(), model.mixed_kernel(ccp))};
}

PolicyValuation assemble_policy_valuation_from_values(const DdcModel& model, const ConditionalValues& v,
                                                      const Matrix& flow) {
  require_size("assemble_policy_valuation_from_values: states", model.state_count(), v.rows());
  require_size("assemble_policy_valuation_from_values: actions", model.action_count(), v.cols());
  Matrix logp(v.rows(), v.cols());
  for (Index x = 0; x < v.rows(); ++x) logp.row(x) = v.row(x).array() - log_sum_exp(v.row(x));
  Matrix p = logp.array().exp().matrix();
  for (Index x = 0; x < p.rows(); ++x) p.row(x) /= p.row(x).sum();
  const Vector u = (p.array() * (flow.array() + kEulerGamma - logp.array())).rowwise().sum().matrix();
  return PolicyValuation{u, DiscountedOperator(model.beta(), model.mixed_kernel(Ccp(std::move(p))))};
}

Ccp logit_ccp(const ConditionalValues& v) {
  Matrix p(v.rows(), v.cols());
  for (Index x = 0; x < v.rows(); ++x) {
    const double mx = v.row(x).maxCoeff();
    p.row(x) = (v.row(x).array() - mx).exp();
    p.row(x) /= p.row(x).sum();
  }
  return Ccp(std::move(p));
}

std::pair<Ccp, ConditionalValues> policy_improvement(const DdcModel& model, const Vector& value) {
  return policy_improvement(model, value, model.flow_utilities());
}

std::pair<Ccp, ConditionalValues> policy_improvement(const DdcModel& model, const Vector& value,
                                                     const Matrix& flow) {
  require_size("policy_improvement", model.state_count(), value.size());
  if (!value.allFinite()) throw InvalidArgument("policy_improvement: value contains NaN/Inf");
  ConditionalValues v = flow + model.beta() * model.expected_value(value);
  Ccp p = logit_ccp(v);
  return {std::move(p), std::move(v)};
}

Vector hotz_miller_invert(const ConditionalValues& v, const Ccp& ccp, Index action) {
  require_size("hotz_miller_invert: states", v.rows(), ccp.states());
  require_size("hotz_miller_invert: actions", v.cols(), ccp.actions());
  if (action < 0 || action >= v.cols()) throw InvalidArgument("hotz_miller_invert: action out of range");
  const auto p = ccp.probs().col(action);
  for (Index x = 0; x < p.size(); ++x) {
    if (!(p(x) > 0.0)) {
      throw InvalidArgument("hotz_miller_invert: p(a|x) = 0 at x=" + std::to_string(x));
    }
  }
  return (v.col(action).array() - p.array().log() + kEulerGamma).matrix();
}

const char* to_string(InnerSolver s) {
  switch (s) {
    case InnerSolver::ModelAdaptive: return "model_adaptive";
    case InnerSolver::SuccessiveApproximation: return "successive_approximation";
    case InnerSolver::Exact: return "exact";
  }
  return "?";
}

InnerSolver parse_inner_solver(const std::string& name) {
  if (name == "ma" || name == "model_adaptive" || name == "model-adaptive") return InnerSolver::ModelAdaptive;
  if (name == "sa" || name == "successive_approximation" || name == "successive-approximation")
    return InnerSolver::SuccessiveApproximation;
  if (name == "exact") return InnerSolver::Exact;
  throw InvalidArgument("unknown solver '" + name + "' (expected ma, sa or exact)");
}

SolveResult solve_valuation(InnerSolver inner, const DiscountedOperator& op, const Vector& u,
                            const SolverConfig& cfg) {
  switch (inner) {
    case InnerSolver::ModelAdaptive: return solve_model_adaptive(op, u, cfg);
    case InnerSolver::SuccessiveApproximation: return solve_successive_approximation(op, u, cfg);
    case InnerSolver::Exact: {
      const auto start = Clock::now();
      SolveResult out;
      out.value = solve_exact(op, u);
      out.report.solver = "exact";
      out.report.converged = true;
      out.report.final_residual = norm_of(apply_system(op, out.value) - u, cfg.tol_norm);
      out.report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
      return out;
    }
  }
  throw InvalidArgument("solve_valuation: unknown solver");
}

PolicyIterationResult policy_iteration(const DdcModel& model, const PolicyIterationConfig& cfg) {
  const auto start = Clock::now();
  const Matrix flow = model.flow_utilities();
  if (!flow.allFinite()) throw InvalidArgument("policy_iteration: non-finite flow utility");

  PolicyIterationResult out;
  Ccp p = cfg.initial_values  ? logit_ccp(*cfg.initial_values)
          : cfg.initial_ccp   ? *cfg.initial_ccp
                              : Ccp::uniform(model.state_count(), model.action_count());
  std::optional<Vector> guess = cfg.initial_guess;
  std::optional<ConditionalValues> logits = cfg.initial_values;

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    const auto step_start = Clock::now();
    const PolicyValuation pv = logits ? assemble_policy_valuation_from_values(model, *logits, flow)
                                      : assemble_policy_valuation(model, p, flow);
    SolverConfig scfg = cfg.solver;
    if (guess) {
      if (cfg.inner == InnerSolver::ModelAdaptive) scfg.initial_y = guess;
      if (cfg.inner == InnerSolver::SuccessiveApproximation) scfg.initial_v = guess;
    }
    SolveResult sol = solve_valuation(cfg.inner, pv.op, pv.u, scfg);
    if (!sol.report.converged) {
      throw ConvergenceError("policy_iteration: inner " + std::string(to_string(cfg.inner)) +
                                 " solve did not converge at outer step " + std::to_string(outer),
                             sol.value, sol.report.final_residual);
    }
    auto [next, v] = policy_improvement(model, sol.value, flow);
    const double change = (next.probs() - p.probs()).lpNorm<Eigen::Infinity>();

    OuterStep step;
    step.outer_iter = outer;
    step.inner_iters = sol.report.iterations;
    step.inner_matvecs = sol.report.matvec_count + sol.report.extra_matvecs;
    step.ccp_change_sup = change;
    step.equation_residual = sup_norm(pv.u - apply_system(pv.op, sol.value));
    step.elapsed_s = std::chrono::duration<double>(Clock::now() - step_start).count();
    out.steps.push_back(step);
    out.total_inner_iterations += sol.report.iterations;

    if (cfg.warm_start) {
      if (cfg.inner == InnerSolver::ModelAdaptive) guess = sol.y;
      if (cfg.inner == InnerSolver::SuccessiveApproximation) guess = sol.value;
    } else {
      guess.reset();
    }
    out.y = sol.y;
    out.value = std::move(sol.value);
    out.evaluated_ccp = std::move(p);
    p = std::move(next);
    logits = v;
    out.conditional_values = std::move(v);
    if (change <= cfg.ccp_tol) {
      out.outer_iterations = outer;
      out.ccp = std::move(p);
      out.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
      return out;
    }
  }
  throw ConvergenceError("policy_iteration: no convergence within " + std::to_string(cfg.max_outer) +
                             " outer iterations",
                         out.value, out.steps.empty() ? 0.0 : out.steps.back().ccp_change_sup);
}

void write_driver_report_csv(const std::filesystem::path& path, const std::vector<OuterStep>& steps) {
  CsvWriter w(path, {"outer_iter", "inner_iters", "inner_matvecs", "ccp_change_sup", "elapsed_s"});
  for (const auto& s : steps) {
    w << s.outer_iter << s.inner_iters << s.inner_matvecs << s.ccp_change_sup << s.elapsed_s;
    w.end_row();
  }
}

Vector solve_by_value_iteration(const DdcModel& model, double tol, int max_iter) {
  const Matrix flow = model.flow_utilities();
  Vector v = Vector::Zero(model.state_count());
  double gap = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Matrix cv = flow + model.beta() * model.expected_value(v);
    Vector next(v.size());
    for (Index x = 0; x < v.size(); ++x) next(x) = log_sum_exp(cv.row(x)) + kEulerGamma;
    gap = sup_norm(next - v);
    v.swap(next);
    if (gap <= tol) return v;
  }
  throw ConvergenceError("solve_by_value_iteration: no convergence", v, gap);
}

}  // namespace ddc
