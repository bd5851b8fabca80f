#include <doctest.h>

#include <filesystem>

#include "ddc/csv_io.hpp"
#include "ddc/error.hpp"
#include "ddc/models/bus_engine.hpp"
#include "ddc/models/entry_exit.hpp"
#include "ddc/policy.hpp"
#include "test_util.hpp"

using namespace ddc;
using ddc::test::random_stochastic;
using ddc::test::random_vector;

namespace {

DenseDdcModel random_model(Index m, Index actions, double beta, std::mt19937_64& rng) {
  std::vector<TransitionKernel> ks;
  for (Index a = 0; a < actions; ++a) ks.emplace_back(random_stochastic(m, rng));
  RowMatrix pts(m, 1);
  for (Index i = 0; i < m; ++i) pts(i, 0) = static_cast<double>(i);
  Matrix u = random_vector(m * actions, rng, -2, 2).reshaped(m, actions);
  return DenseDdcModel(StateGrid(pts), beta, u, std::move(ks));
}

double row_lse(const Matrix& v, Index x) { return log_sum_exp(v.row(x)); }

}  // namespace

TEST_CASE("assemble_policy_valuation") {
  std::mt19937_64 rng(1);

  SUBCASE("single action adds kappa") {
    const DenseDdcModel model = random_model(6, 1, 0.9, rng);
    const PolicyValuation pv = assemble_policy_valuation(model, Ccp(Matrix::Ones(6, 1)));
    for (Index x = 0; x < 6; ++x) CHECK(pv.u(x) == doctest::Approx(model.flow_utility(x, 0) + kEulerGamma));
    CHECK(pv.op.beta() == 0.9);
  }

  SUBCASE("uniform policy over zero utilities") {
    std::vector<TransitionKernel> ks{TransitionKernel(random_stochastic(4, rng)),
                                     TransitionKernel(random_stochastic(4, rng))};
    RowMatrix pts(4, 1);
    pts << 0, 1, 2, 3;
    const DenseDdcModel model(StateGrid(pts), 0.9, Matrix::Zero(4, 2), ks);
    const PolicyValuation pv = assemble_policy_valuation(model, Ccp::uniform(4, 2));
    for (Index x = 0; x < 4; ++x) CHECK(pv.u(x) == doctest::Approx(kEulerGamma + std::log(2.0)).epsilon(1e-15));
  }

  SUBCASE("zero probability is reported with its location") {
    const DenseDdcModel model = random_model(3, 2, 0.9, rng);
    Matrix probs(3, 2);
    probs << 0.5, 0.5, 1.0, 0.0, 0.3, 0.7;
    try {
      assemble_policy_valuation(model, Ccp(probs));
      FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
      const std::string what = e.what();
      CHECK(what.find("x=1") != std::string::npos);
      CHECK(what.find("a=1") != std::string::npos);
    }
  }

  SUBCASE("from values matches the ccp form for interior policies") {
    const DenseDdcModel model = random_model(10, 3, 0.95, rng);
    const auto [ccp, v] = policy_improvement(model, random_vector(10, rng));
    const PolicyValuation a = assemble_policy_valuation(model, ccp);
    const PolicyValuation b = assemble_policy_valuation_from_values(model, v, model.flow_utilities());
    CHECK(sup_norm(a.u - b.u) <= 1e-13);
  }
}

TEST_CASE("bus engine: valuation at the true policy reproduces the fixed point") {
  const BusEngineModel model;
  const Vector v_opt = solve_by_value_iteration(model, 1e-12);
  const auto [ccp, cv] = policy_improvement(model, v_opt);
  const PolicyValuation pv = assemble_policy_valuation(model, ccp);
  CHECK(sup_norm(solve_exact(pv.op, pv.u) - v_opt) <= 1e-6);
}

TEST_CASE("policy_improvement") {
  std::mt19937_64 rng(2);

  SUBCASE("equal utilities and zero value give a uniform policy") {
    std::vector<TransitionKernel> ks(3, TransitionKernel(random_stochastic(5, rng)));
    RowMatrix pts(5, 1);
    pts << 0, 1, 2, 3, 4;
    const DenseDdcModel model(StateGrid(pts), 0.9, Matrix::Constant(5, 3, 1.5), ks);
    const auto [ccp, v] = policy_improvement(model, Vector::Zero(5));
    CHECK((ccp.probs().array() - 1.0 / 3.0).abs().maxCoeff() <= 1e-15);
  }

  SUBCASE("softmax is shift invariant") {
    const Matrix v = random_vector(40, rng, -5, 5).reshaped(10, 4);
    Matrix shifted = v;
    for (Index x = 0; x < 10; ++x) shifted.row(x).array() += 100.0 * static_cast<double>(x) - 300.0;
    const Ccp a = logit_ccp(v), b = logit_ccp(shifted);
    CHECK((a.probs() - b.probs()).cwiseAbs().maxCoeff() <= 1e-14);
    for (Index x = 0; x < 10; ++x) {
      Index ia = 0, ib = 0;
      a.probs().row(x).maxCoeff(&ia);
      b.probs().row(x).maxCoeff(&ib);
      CHECK(ia == ib);
    }
  }

  SUBCASE("huge values do not overflow") {
    Matrix v(1, 2);
    v << 1e308, 1e308 - 1e293;
    const Ccp p = logit_ccp(v);
    CHECK(p.probs().allFinite());
    CHECK(p(0, 0) == doctest::Approx(1.0));
  }

  SUBCASE("bus engine from V = 0 is the logit of flow utilities") {
    const BusEngineModel model;
    const auto [ccp, v] = policy_improvement(model, Vector::Zero(model.state_count()));
    for (Index x = 0; x < model.state_count(); x += 20) {
      const double u0 = model.flow_utility(x, kReplace), u1 = model.flow_utility(x, kMaintain);
      const double p0 = std::exp(u0) / (std::exp(u0) + std::exp(u1));
      CHECK(ccp(x, kReplace) == doctest::Approx(p0).epsilon(1e-14));
      CHECK(v(x, kMaintain) == doctest::Approx(u1).epsilon(1e-14));
    }
  }
}

TEST_CASE("hotz_miller_invert") {
  std::mt19937_64 rng(3);

  SUBCASE("every action gives log-sum-exp plus kappa") {
    const DenseDdcModel model = random_model(12, 3, 0.9, rng);
    const auto [ccp, v] = policy_improvement(model, random_vector(12, rng, -10, 10));
    const Vector v0 = hotz_miller_invert(v, ccp, 0);
    for (Index a = 1; a < 3; ++a) CHECK(sup_norm(hotz_miller_invert(v, ccp, a) - v0) <= 1e-10);
    for (Index x = 0; x < 12; ++x) CHECK(std::abs(v0(x) - (row_lse(v, x) + kEulerGamma)) <= 1e-10);
  }

  SUBCASE("single action") {
    const Matrix v = random_vector(5, rng).reshaped(5, 1);
    const Vector out = hotz_miller_invert(v, Ccp(Matrix::Ones(5, 1)), 0);
    CHECK(sup_norm(out - (v.col(0).array() + kEulerGamma).matrix()) <= 1e-15);
  }

  SUBCASE("bus engine at the solution") {
    const BusEngineModel model;
    const Vector v_opt = solve_by_value_iteration(model, 1e-12);
    const auto [ccp, v] = policy_improvement(model, v_opt);
    CHECK(sup_norm(hotz_miller_invert(v, ccp, kReplace) - v_opt) <= 1e-9);
    CHECK(sup_norm(hotz_miller_invert(v, ccp, kMaintain) - v_opt) <= 1e-9);
  }

  SUBCASE("zero probability") {
    Matrix probs(2, 2);
    probs << 1, 0, 0.5, 0.5;
    CHECK_THROWS_AS(hotz_miller_invert(Matrix::Zero(2, 2), Ccp(probs), 1), InvalidArgument);
  }
}

TEST_CASE("policy_iteration") {
  std::mt19937_64 rng(4);

  SUBCASE("single action converges in one outer step") {
    const DenseDdcModel model = random_model(8, 1, 0.9, rng);
    const PolicyIterationResult r = policy_iteration(model);
    CHECK(r.outer_iterations == 1);
    const PolicyValuation pv = assemble_policy_valuation(model, Ccp(Matrix::Ones(8, 1)));
    CHECK(sup_norm(r.value - solve_exact(pv.op, pv.u)) <= 1e-7);
  }

  SUBCASE("bus engine matches value iteration for every inner solver") {
    const BusEngineModel model;
    const Vector v_opt = solve_by_value_iteration(model, 1e-12);
    for (InnerSolver s : {InnerSolver::ModelAdaptive, InnerSolver::SuccessiveApproximation, InnerSolver::Exact}) {
      PolicyIterationConfig cfg;
      cfg.inner = s;
      cfg.solver.tol = 1e-10;
      cfg.ccp_tol = 1e-10;
      const PolicyIterationResult r = policy_iteration(model, cfg);
      CAPTURE(to_string(s));
      CHECK(sup_norm(r.value - v_opt) <= 1e-6);
      for (const OuterStep& st : r.steps) CHECK(st.equation_residual <= 1e-10 * (1 + 1e-6));
    }
  }

  SUBCASE("warm and cold starts reach the same value") {
    const DenseDdcModel model = random_model(50, 3, 0.97, rng);
    PolicyIterationConfig cfg;
    cfg.solver.tol = 1e-11;
    cfg.ccp_tol = 1e-9;
    const PolicyIterationResult warm = policy_iteration(model, cfg);
    cfg.warm_start = false;
    const PolicyIterationResult cold = policy_iteration(model, cfg);
    CHECK(sup_norm(warm.value - cold.value) <= 1e-8);
  }

  SUBCASE("outer cap") {
    const BusEngineModel model;
    PolicyIterationConfig cfg;
    cfg.max_outer = 1;
    cfg.ccp_tol = 1e-14;
    CHECK_THROWS_AS(policy_iteration(model, cfg), ConvergenceError);
  }

  SUBCASE("inner failure") {
    const BusEngineModel model;
    PolicyIterationConfig cfg;
    cfg.solver.max_iter = 1;
    CHECK_THROWS_AS(policy_iteration(model, cfg), ConvergenceError);
  }
}

TEST_CASE("entry/exit policy iteration at M = 5 takes four outer steps") {
  EntryExitParams p;
  p.m = 5;
  const EntryExitModel model(p);
  CHECK(model.state_count() == 2 * 3125);
  PolicyIterationConfig cfg;
  cfg.solver.tol = 1e-7;
  cfg.solver.record_history = false;
  cfg.warm_start = false;
  const PolicyIterationResult r = policy_iteration(model, cfg);
  CHECK(r.outer_iterations == 4);
}

TEST_CASE("inner solver names") {
  CHECK(parse_inner_solver("ma") == InnerSolver::ModelAdaptive);
  CHECK(parse_inner_solver("sa") == InnerSolver::SuccessiveApproximation);
  CHECK(parse_inner_solver("exact") == InnerSolver::Exact);
  CHECK(parse_inner_solver(to_string(InnerSolver::ModelAdaptive)) == InnerSolver::ModelAdaptive);
  CHECK_THROWS_AS(parse_inner_solver("newton"), InvalidArgument);
}

TEST_CASE("driver report CSV") {
  const BusEngineModel model;
  const PolicyIterationResult r = policy_iteration(model);
  const auto path = std::filesystem::temp_directory_path() / "ddc_driver_report_test.csv";
  write_driver_report_csv(path, r.steps);
  const CsvTable t = read_csv(path);
  CHECK(t.header ==
        std::vector<std::string>{"outer_iter", "inner_iters", "inner_matvecs", "ccp_change_sup", "elapsed_s"});
  CHECK(t.rows.size() == r.steps.size());
  CHECK(t.rows.back()[3] <= 1e-5);
  std::filesystem::remove(path);
}
