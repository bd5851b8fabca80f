#include "ddc/discounted_operator.hpp"

#include <cmath>

namespace ddc {

Ccp::Ccp(Matrix probs, double tol) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) throw InvalidArgument("Ccp: empty probability table");
  if (!probs_.allFinite()) throw InvalidArgument("Ccp: non-finite probability");
  for (Index x = 0; x < probs_.rows(); ++x) {
    if ((probs_.row(x).array() < 0.0).any()) {
      throw InvalidArgument("Ccp: negative probability at state " + std::to_string(x));
    }
    const double s = probs_.row(x).sum();
    if (std::abs(s - 1.0) > tol) {
      throw InvalidArgument("Ccp: row " + std::to_string(x) + " sums to " + std::to_string(s));
    }
  }
}

Ccp Ccp::uniform(Index states, Index actions) {
  return Ccp(Matrix::Constant(states, actions, 1.0 / static_cast<double>(actions)));
}

DiscountedOperator::DiscountedOperator(double beta, std::shared_ptr<const MarkovKernel> kernel)
    : beta_(beta), kernel_(std::move(kernel)) {
  if (!kernel_) throw InvalidArgument("DiscountedOperator: null kernel");
  if (!(beta_ > 0.0 && beta_ < 1.0)) {
    throw InvalidArgument("DiscountedOperator: beta must lie in (0,1), got " + std::to_string(beta_));
  }
}

DiscountedOperator::DiscountedOperator(double beta, TransitionKernel kernel)
    : DiscountedOperator(beta, std::make_shared<const TransitionKernel>(std::move(kernel))) {}

Matrix DiscountedOperator::dense_system() const {
  Matrix a = -beta_ * kernel_->to_dense();
  a.diagonal().array() += 1.0;
  return a;
}

Vector apply_T(const DiscountedOperator& op, const Vector& v) {
  require_size("apply_T", op.size(), v.size());
  Vector out(op.size());
  op.kernel().apply(v, out);
  out *= op.beta();
  return out;
}

Vector apply_T_adjoint(const DiscountedOperator& op, const Vector& v) {
  require_size("apply_T_adjoint", op.size(), v.size());
  Vector out(op.size());
  op.kernel().apply_transpose(v, out);
  out *= op.beta();
  return out;
}

Vector apply_normal(const DiscountedOperator& op, const Vector& y) {
  const Vector w = y - apply_T_adjoint(op, y);
  return w - apply_T(op, w);
}

Vector apply_system(const DiscountedOperator& op, const Vector& v) { return v - apply_T(op, v); }

Vector stationary_distribution(const MarkovKernel& kernel, double tol, int max_iter) {
  const Index m = kernel.size();
  Vector mu = Vector::Constant(m, 1.0 / static_cast<double>(m));
  Vector next(m);
  double gap = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    kernel.apply_transpose(mu, next);
    next /= next.sum();
    gap = (next - mu).lpNorm<1>();
    mu.swap(next);
    if (gap <= tol) return mu;
  }
  throw ConvergenceError("stationary_distribution: no convergence after " + std::to_string(max_iter) +
                             " iterations (L1 gap " + std::to_string(gap) + ")",
                         mu, gap);
}

TransitionKernel mix_kernel(std::span<const TransitionKernel> per_action, const Ccp& ccp) {
  if (per_action.empty()) throw InvalidArgument("mix_kernel: no kernels");
  require_size("mix_kernel: action count", static_cast<Index>(per_action.size()), ccp.actions());
  const Index m = per_action.front().size();
  for (const auto& k : per_action) require_size("mix_kernel: kernel size", m, k.size());
  require_size("mix_kernel: ccp states", m, ccp.states());
  Matrix mixed = Matrix::Zero(m, m);
  for (size_t a = 0; a < per_action.size(); ++a) {
    mixed.noalias() += ccp.probs().col(static_cast<Index>(a)).asDiagonal() * per_action[a].matrix();
  }
  return TransitionKernel(std::move(mixed));
}

}  // namespace ddc
