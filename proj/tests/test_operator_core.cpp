#include <doctest.h>

#include <array>

#include "ddc/ccp.hpp"
#include "ddc/discounted_operator.hpp"
#include "ddc/error.hpp"
#include "ddc/state_grid.hpp"
#include "test_util.hpp"

using namespace ddc;
using ddc::test::random_stochastic;
using ddc::test::random_vector;

TEST_CASE("state grid rejects empty and duplicate points") {
  RowMatrix pts(3, 2);
  pts << 0, 0, 1, 0, 0, 1;
  const StateGrid g(pts);
  CHECK(g.count() == 3);
  CHECK(g.dim() == 2);

  RowMatrix dup(2, 1);
  dup << 0.5, 0.5;
  CHECK_THROWS_AS(StateGrid{dup}, InvalidArgument);
  CHECK_THROWS_AS(StateGrid(RowMatrix(0, 1)), InvalidArgument);
}

TEST_CASE("transition kernel validates row sums and signs") {
  Matrix ok(2, 2);
  ok << 0.3, 0.7, 1.0, 0.0;
  CHECK_NOTHROW(TransitionKernel{ok});

  Matrix off = ok;
  off(0, 0) += 1e-9;
  CHECK_THROWS_AS(TransitionKernel{off}, InvalidArgument);

  Matrix neg(2, 2);
  neg << 1.2, -0.2, 0.5, 0.5;
  CHECK_THROWS_AS(TransitionKernel{neg}, InvalidArgument);
}

TEST_CASE("discounted operator rejects beta outside (0,1)") {
  const TransitionKernel k(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(DiscountedOperator(0.0, k), InvalidArgument);
  CHECK_THROWS_AS(DiscountedOperator(1.0, k), InvalidArgument);
  CHECK_NOTHROW(DiscountedOperator(0.5, k));
}

TEST_CASE("apply_T") {
  std::mt19937_64 rng(11);

  SUBCASE("constant function maps to beta") {
    const DiscountedOperator op(0.9, TransitionKernel(random_stochastic(7, rng)));
    const Vector out = apply_T(op, Vector::Ones(7));
    for (Index i = 0; i < 7; ++i) CHECK(out(i) == doctest::Approx(0.9).epsilon(1e-14));
  }

  SUBCASE("zero maps to zero") {
    const DiscountedOperator op(0.9, TransitionKernel(random_stochastic(5, rng)));
    CHECK(apply_T(op, Vector::Zero(5)).isZero(0.0));
  }

  SUBCASE("3x3 against scalar loops") {
    const Matrix p = random_stochastic(3, rng);
    const DiscountedOperator op(0.5, TransitionKernel(p));
    const Vector v = (Vector(3) << 1, 2, 3).finished();
    const Vector out = apply_T(op, v);
    for (Index i = 0; i < 3; ++i) {
      double expect = 0.0;
      for (Index j = 0; j < 3; ++j) expect += p(i, j) * v(j);
      CHECK(std::abs(out(i) - 0.5 * expect) <= 1e-14);
    }
  }

  SUBCASE("size mismatch names both sizes") {
    const DiscountedOperator op(0.5, TransitionKernel(random_stochastic(4, rng)));
    try {
      apply_T(op, Vector::Zero(3));
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      CHECK(e.expected() == 4);
      CHECK(e.actual() == 3);
    }
  }
}

TEST_CASE("apply_T_adjoint") {
  std::mt19937_64 rng(12);

  SUBCASE("adjoint identity on 20 states") {
    const DiscountedOperator op(0.95, TransitionKernel(random_stochastic(20, rng)));
    const Vector phi = random_vector(20, rng), psi = random_vector(20, rng);
    CHECK(std::abs(apply_T(op, phi).dot(psi) - phi.dot(apply_T_adjoint(op, psi))) <= 1e-12);
  }

  SUBCASE("zero maps to zero") {
    const DiscountedOperator op(0.95, TransitionKernel(random_stochastic(6, rng)));
    CHECK(apply_T_adjoint(op, Vector::Zero(6)).isZero(0.0));
  }

  SUBCASE("symmetric kernel: T and T* coincide") {
    Matrix p(3, 3);
    p << 0.5, 0.3, 0.2, 0.3, 0.4, 0.3, 0.2, 0.3, 0.5;
    const DiscountedOperator op(0.8, TransitionKernel(p));
    const Vector v = random_vector(3, rng);
    CHECK((apply_T(op, v) - apply_T_adjoint(op, v)).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("apply_normal") {
  std::mt19937_64 rng(13);

  SUBCASE("zero maps to zero") {
    const DiscountedOperator op(0.9, TransitionKernel(random_stochastic(5, rng)));
    CHECK(apply_normal(op, Vector::Zero(5)).isZero(0.0));
  }

  SUBCASE("vanishing beta degenerates to identity") {
    const DiscountedOperator op(1e-300, TransitionKernel(random_stochastic(5, rng)));
    const Vector y = random_vector(5, rng);
    CHECK((apply_normal(op, y) - y).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("5 states against explicit assembly") {
    const double beta = 0.9;
    const Matrix p = random_stochastic(5, rng);
    const DiscountedOperator op(beta, TransitionKernel(p));
    const Matrix id = Matrix::Identity(5, 5);
    const Matrix a = (id - beta * p) * (id - beta * p.transpose());
    const Vector y = random_vector(5, rng);
    CHECK((apply_normal(op, y) - a * y).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("stationary_distribution") {
  SUBCASE("two-state swap") {
    Matrix p(2, 2);
    p << 0, 1, 1, 0;
    const Vector mu = stationary_distribution(TransitionKernel(p));
    CHECK(mu(0) == doctest::Approx(0.5));
    CHECK(mu(1) == doctest::Approx(0.5));
  }

  SUBCASE("absorbing state") {
    Matrix p(3, 3);
    p << 1, 0, 0, 0.5, 0.25, 0.25, 0.2, 0.3, 0.5;
    const Vector mu = stationary_distribution(TransitionKernel(p));
    CHECK(mu(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(mu(1)) <= 1e-10);
    CHECK(std::abs(mu(2)) <= 1e-10);
  }

  SUBCASE("10 states against dense left eigenvector") {
    std::mt19937_64 rng(14);
    const Matrix p = random_stochastic(10, rng);
    const Vector mu = stationary_distribution(TransitionKernel(p));
    CHECK(mu.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mu.minCoeff() >= 0.0);

    Eigen::EigenSolver<Matrix> es(p.transpose());
    Index best = 0;
    (es.eigenvalues().array() - 1.0).abs().minCoeff(&best);
    Vector oracle = es.eigenvectors().col(best).real();
    oracle /= oracle.sum();
    CHECK((mu - oracle).cwiseAbs().maxCoeff() <= 1e-8);
  }

  SUBCASE("iteration cap reports the last iterate and gap") {
    Matrix q(3, 3);
    q << 0, 1, 0, 0, 0, 1, 0.5, 0.5, 0;
    try {
      stationary_distribution(TransitionKernel(q), 1e-14, 3);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.gap() > 1e-14);
      CHECK(e.last_iterate().size() == 3);
    }
  }
}

TEST_CASE("mix_kernel") {
  std::mt19937_64 rng(15);

  SUBCASE("degenerate ccp selects one kernel") {
    const std::array<TransitionKernel, 2> ks{TransitionKernel(random_stochastic(4, rng)),
                                             TransitionKernel(random_stochastic(4, rng))};
    Matrix probs = Matrix::Zero(4, 2);
    probs.col(0).setOnes();
    const TransitionKernel mixed = mix_kernel(ks, Ccp(probs));
    CHECK((mixed.matrix() - ks[0].matrix()).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("identical kernels are a fixed point") {
    const TransitionKernel k(random_stochastic(4, rng));
    const std::array<TransitionKernel, 2> ks{k, k};
    Matrix probs(4, 2);
    probs << 0.1, 0.9, 0.5, 0.5, 0.7, 0.3, 1.0, 0.0;
    CHECK((mix_kernel(ks, Ccp(probs)).matrix() - k.matrix()).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("3 states, 2 actions against scalar mixture") {
    const std::array<TransitionKernel, 2> ks{TransitionKernel(random_stochastic(3, rng)),
                                             TransitionKernel(random_stochastic(3, rng))};
    Matrix probs(3, 2);
    probs << 0.2, 0.8, 0.65, 0.35, 0.5, 0.5;
    const Matrix mixed = mix_kernel(ks, Ccp(probs)).matrix();
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j)
        CHECK(std::abs(mixed(i, j) - (probs(i, 0) * ks[0](i, j) + probs(i, 1) * ks[1](i, j))) <= 1e-14);
  }

  SUBCASE("action count mismatch") {
    const std::array<TransitionKernel, 2> ks{TransitionKernel(random_stochastic(3, rng)),
                                             TransitionKernel(random_stochastic(3, rng))};
    CHECK_THROWS_AS(mix_kernel(ks, Ccp::uniform(3, 3)), DimensionError);
  }

  SUBCASE("row sums stay within 1e-12") {
    for (int rep = 0; rep < 20; ++rep) {
      const std::array<TransitionKernel, 3> ks{TransitionKernel(random_stochastic(30, rng)),
                                               TransitionKernel(random_stochastic(30, rng)),
                                               TransitionKernel(random_stochastic(30, rng))};
      Matrix probs = (random_vector(90, rng, 0.0, 1.0)).reshaped(30, 3);
      for (Index i = 0; i < 30; ++i) probs.row(i) /= probs.row(i).sum();
      CHECK(max_row_sum_error(mix_kernel(ks, Ccp(probs)).matrix()) <= 1e-12);
    }
  }
}

TEST_CASE("operator properties on random instances") {
  std::mt19937_64 rng(16);
  const std::array<Index, 4> sizes{2, 17, 64, 200};
  for (Index m : sizes) {
    const DiscountedOperator op(0.97, TransitionKernel(random_stochastic(m, rng, 0.3)));
    for (int rep = 0; rep < 25; ++rep) {
      const Vector phi = random_vector(m, rng), psi = random_vector(m, rng);
      const double scale = std::max(1.0, phi.norm() * psi.norm());
      CHECK(std::abs(apply_T(op, phi).dot(psi) - phi.dot(apply_T_adjoint(op, psi))) <= 1e-12 * scale);
      CHECK(std::abs(apply_normal(op, phi).dot(psi) - phi.dot(apply_normal(op, psi))) <= 1e-12 * scale);
      CHECK(apply_normal(op, phi).dot(phi) > 0.0);
      CHECK(sup_norm(apply_T(op, phi)) <= 0.97 * sup_norm(phi) * (1 + 1e-15));
    }
  }
}

TEST_CASE("Kronecker chain matches its dense product") {
  std::mt19937_64 rng(17);
  const KroneckerChain kc({TransitionKernel(random_stochastic(3, rng)), TransitionKernel(random_stochastic(2, rng)),
                           TransitionKernel(random_stochastic(4, rng))});
  const Matrix dense = kc.to_dense();
  CHECK(dense.rows() == 24);
  CHECK(max_row_sum_error(dense) <= 1e-12);

  const Matrix& a = kc.factors()[0].matrix();
  const Matrix& b = kc.factors()[1].matrix();
  const Matrix& c = kc.factors()[2].matrix();
  for (Index i = 0; i < 24; ++i)
    for (Index j = 0; j < 24; ++j)
      CHECK(std::abs(dense(i, j) - a(i / 8, j / 8) * b((i / 4) % 2, (j / 4) % 2) * c(i % 4, j % 4)) <= 1e-15);

  const Vector v = random_vector(24, rng);
  CHECK((kc.apply(v) - dense * v).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((kc.apply_transpose(v) - dense.transpose() * v).cwiseAbs().maxCoeff() <= 1e-14);
}
