#include "ddc/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "ddc/csv_io.hpp"

namespace ddc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_inputs(const char* who, const DiscountedOperator& op, const Vector& u, const SolverConfig& cfg) {
  require_size(who, op.size(), u.size());
  if (!u.allFinite()) throw InvalidArgument(std::string(who) + ": right-hand side contains NaN/Inf");
  if (!(cfg.tol > 0.0)) throw InvalidArgument(std::string(who) + ": tol must be positive");
  if (cfg.max_iter < 1) throw InvalidArgument(std::string(who) + ": max_iter must be >= 1");
}

}  // namespace

Vector value_from_normal_iterate(const DiscountedOperator& op, const Vector& y) {
  return y - apply_T_adjoint(op, y);
}

SolveResult solve_model_adaptive(const DiscountedOperator& op, const Vector& u, const SolverConfig& cfg) {
  check_inputs("solve_model_adaptive", op, u, cfg);
  const auto start = Clock::now();
  SolveResult out;
  SolverReport& rep = out.report;
  rep.solver = "model_adaptive";

  Vector y = Vector::Zero(op.size());
  Vector r = u;
  if (cfg.initial_y) {
    require_size("solve_model_adaptive: initial_y", op.size(), cfg.initial_y->size());
    y = *cfg.initial_y;
    r = u - apply_normal(op, y);
    rep.extra_matvecs += kNormalMatvecs;
  }
  Vector s = r;
  double rr = r.squaredNorm();
  Vector w(op.size()), as(op.size());

  auto record = [&](int k, double alpha, double beta_cg) {
    if (cfg.record_history) {
      rep.history.push_back({k, sup_norm(r), std::sqrt(rr), alpha, beta_cg, seconds_since(start)});
    }
    if (cfg.observer) cfg.observer(IterationView{k, y, r});
  };
  record(0, 0.0, 0.0);

  double res = norm_of(r, cfg.tol_norm);
  rep.converged = res <= cfg.tol;
  int k = 0;
  while (!rep.converged && k < cfg.max_iter) {
    ++k;
    w = s - apply_T_adjoint(op, s);
    const double ww = w.squaredNorm();
    if (ww <= 1e-300) {
      throw NumericalError("solve_model_adaptive: breakdown, ||(I - T*) s|| vanished with residual " +
                               std::to_string(res),
                           k);
    }
    const double alpha = rr / ww;
    y.noalias() += alpha * s;
    as = w - apply_T(op, w);
    rep.matvec_count += 2;
    if (cfg.recompute_every > 0 && k % cfg.recompute_every == 0) {
      r = u - apply_normal(op, y);
      rep.recompute_matvecs += kNormalMatvecs;
      rep.extra_matvecs += kNormalMatvecs;
    } else {
      r.noalias() -= alpha * as;
    }
    const double rr_next = r.squaredNorm();
    if (!std::isfinite(rr_next) || !std::isfinite(alpha)) {
      throw NumericalError("solve_model_adaptive", k);
    }
    const double beta_cg = rr_next / rr;
    s = r + beta_cg * s;
    rr = rr_next;
    record(k, alpha, beta_cg);
    res = norm_of(r, cfg.tol_norm);
    rep.converged = res <= cfg.tol;
  }

  rep.iterations = k;
  rep.final_residual = res;
  out.value = value_from_normal_iterate(op, y);
  rep.extra_matvecs += 1;
  out.y = std::move(y);
  rep.wall_time = seconds_since(start);
  return out;
}

SolveResult solve_successive_approximation(const DiscountedOperator& op, const Vector& u,
                                           const SolverConfig& cfg) {
  check_inputs("solve_successive_approximation", op, u, cfg);
  const auto start = Clock::now();
  SolveResult out;
  SolverReport& rep = out.report;
  rep.solver = "successive_approximation";

  Vector v = Vector::Zero(op.size());
  if (cfg.initial_v) {
    require_size("solve_successive_approximation: initial_v", op.size(), cfg.initial_v->size());
    v = *cfg.initial_v;
  }
  Vector next(op.size()), r(op.size());
  double res = 0.0;
  int k = 0;
  while (k < cfg.max_iter) {
    ++k;
    op.kernel().apply(v, next);
    next = u + op.beta() * next;
    ++rep.matvec_count;
    r = next - v;
    v.swap(next);
    res = norm_of(r, cfg.tol_norm);
    if (!std::isfinite(res)) throw NumericalError("solve_successive_approximation", k);
    if (cfg.record_history) rep.history.push_back({k, sup_norm(r), r.norm(), 0.0, 0.0, seconds_since(start)});
    if (cfg.observer) cfg.observer(IterationView{k, v, r});
    if (res <= cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.iterations = k;
  rep.final_residual = res;
  out.value = std::move(v);
  rep.wall_time = seconds_since(start);
  return out;
}

TdResult solve_temporal_difference(const DiscountedOperator& op, const Vector& u, const Matrix& basis,
                                   const Vector& weights) {
  const auto start = Clock::now();
  const Index m = op.size();
  require_size("solve_temporal_difference: u", m, u.size());
  require_size("solve_temporal_difference: basis rows", m, basis.rows());
  if (basis.cols() < 1) throw InvalidArgument("solve_temporal_difference: empty basis");
  if (!u.allFinite()) throw InvalidArgument("solve_temporal_difference: right-hand side contains NaN/Inf");
  Vector wts = weights.size() == 0 ? Vector::Ones(m) : weights;
  require_size("solve_temporal_difference: weights", m, wts.size());
  if ((wts.array() < 0.0).any() || wts.sum() <= 0.0) {
    throw InvalidArgument("solve_temporal_difference: weights must be nonnegative and not all zero");
  }

  const Index k = basis.cols();
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    throw SingularSystemError("solve_temporal_difference: basis has rank " + std::to_string(qr.rank()) +
                              " but " + std::to_string(k) + " columns");
  }
  const Matrix q = qr.householderQ() * Matrix::Identity(m, k);

  Matrix tq(m, k);
  for (Index c = 0; c < k; ++c) tq.col(c) = apply_T(op, q.col(c));
  const Matrix qw = q.transpose() * wts.asDiagonal();
  const Matrix a = qw * (q - tq);
  const Vector b = qw * u;
  Eigen::PartialPivLU<Matrix> lu(a);
  if (!(lu.rcond() > 1e-13)) {
    throw SingularSystemError("solve_temporal_difference: projected system is singular (rcond " +
                              std::to_string(lu.rcond()) + ")");
  }
  const Vector theta = lu.solve(b);

  TdResult out;
  out.value = q * theta;
  const Vector r_theta =
      qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>().solve(theta);
  out.coefficients = qr.colsPermutation() * r_theta;
  out.report.solver = "temporal_difference";
  out.report.iterations = 1;
  out.report.matvec_count = k + 1;
  out.report.final_residual = sup_norm(apply_system(op, out.value) - u);
  out.report.converged = true;
  out.report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

Vector solve_exact(const DiscountedOperator& op, const Vector& u, Index cap) {
  require_size("solve_exact", op.size(), u.size());
  if (!u.allFinite()) throw InvalidArgument("solve_exact: right-hand side contains NaN/Inf");
  if (op.size() > cap) {
    throw InvalidArgument("solve_exact: " + std::to_string(op.size()) + " states exceeds the dense cap " +
                          std::to_string(cap));
  }
  const Matrix a = op.dense_system();
  Eigen::PartialPivLU<Matrix> lu(a);
  if (!(lu.rcond() > 1e-14)) {
    throw SingularSystemError("solve_exact: I - beta P is numerically singular (rcond " +
                              std::to_string(lu.rcond()) + ")");
  }
  Vector v = lu.solve(u);
  const Vector resid = u - a * v;
  if (sup_norm(resid) > 1e-12 * (1.0 + sup_norm(u))) v += lu.solve(resid);
  return v;
}

Matrix polynomial_basis(const StateGrid& grid, int degree, bool interactions) {
  if (degree < 0) throw InvalidArgument("polynomial_basis: degree must be >= 0");
  const Index m = grid.count();
  std::vector<Vector> cols;
  cols.push_back(Vector::Ones(m));
  std::vector<Vector> linear;
  for (Index d = 0; d < grid.dim(); ++d) {
    const auto x = grid.points().col(d);
    std::set<double> distinct;
    for (Index i = 0; i < m; ++i) distinct.insert(x(i));
    if (distinct.size() < 2) continue;
    const double lo = *distinct.begin();
    const double hi = *distinct.rbegin();
    const Vector scaled = ((x.array() - 0.5 * (lo + hi)) / (0.5 * (hi - lo))).matrix();
    const int max_power = std::min<int>(degree, static_cast<int>(distinct.size()) - 1);
    Vector power = Vector::Ones(m);
    for (int p = 1; p <= max_power; ++p) {
      power = power.cwiseProduct(scaled);
      cols.push_back(power);
    }
    if (degree >= 1) linear.push_back(scaled);
  }
  if (interactions) {
    for (size_t i = 0; i < linear.size(); ++i)
      for (size_t j = i + 1; j < linear.size(); ++j) cols.push_back(linear[i].cwiseProduct(linear[j]));
  }
  Matrix basis(m, static_cast<Index>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) basis.col(static_cast<Index>(c)) = cols[c];
  return basis;
}

void write_trace_csv(const std::filesystem::path& path, const SolverReport& report) {
  CsvWriter w(path, {"iter", "res_sup", "res_l2", "alpha", "beta_cg", "elapsed_s"});
  for (const auto& h : report.history) {
    w << h.iter << h.res_sup << h.res_l2 << h.alpha << h.beta_cg << h.elapsed_s;
    w.end_row();
  }
}

}  // namespace ddc
