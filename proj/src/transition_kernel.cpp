#include "ddc/transition_kernel.hpp"

#include <cmath>

namespace ddc {

Matrix MarkovKernel::to_dense() const {
  const Index m = size();
  Matrix dense(m, m);
  Vector e = Vector::Zero(m);
  Vector col(m);
  for (Index j = 0; j < m; ++j) {
    e(j) = 1.0;
    apply(e, col);
    dense.col(j) = col;
    e(j) = 0.0;
  }
  return dense;
}

double max_row_sum_error(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

TransitionKernel::TransitionKernel(Matrix matrix, double tol) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1 || matrix_.rows() != matrix_.cols()) {
    throw DimensionError("TransitionKernel must be square", matrix_.rows(), matrix_.cols());
  }
  if (!matrix_.allFinite()) throw InvalidArgument("TransitionKernel: non-finite entry");
  for (Index i = 0; i < matrix_.rows(); ++i) {
    if ((matrix_.row(i).array() < 0.0).any()) {
      throw InvalidArgument("TransitionKernel: negative entry in row " + std::to_string(i));
    }
    const double s = matrix_.row(i).sum();
    if (std::abs(s - 1.0) > tol) {
      throw InvalidArgument("TransitionKernel: row " + std::to_string(i) + " sums to " +
                            std::to_string(s));
    }
  }
}

void TransitionKernel::apply(const Vector& v, Vector& out) const {
  require_size("TransitionKernel::apply", size(), v.size());
  out.noalias() = matrix_ * v;
}

void TransitionKernel::apply_transpose(const Vector& v, Vector& out) const {
  require_size("TransitionKernel::apply_transpose", size(), v.size());
  out.noalias() = matrix_.transpose() * v;
}

KroneckerChain::KroneckerChain(std::vector<TransitionKernel> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw InvalidArgument("KroneckerChain: no factors");
  for (const auto& f : factors_) size_ *= f.size();
}

void KroneckerChain::contract(const Vector& v, Vector& out, bool transpose) const {
  require_size("KroneckerChain", size_, v.size());
  Vector cur = v;
  Vector next(size_);
  Index stride = size_;
  Index outer = 1;
  for (const auto& factor : factors_) {
    const Index n = factor.size();
    stride /= n;
    for (Index o = 0; o < outer; ++o) {
      const Index offset = o * n * stride;
      Eigen::Map<const RowMatrix> block(cur.data() + offset, n, stride);
      Eigen::Map<RowMatrix> dst(next.data() + offset, n, stride);
      if (transpose) {
        dst.noalias() = factor.matrix().transpose() * block;
      } else {
        dst.noalias() = factor.matrix() * block;
      }
    }
    outer *= n;
    cur.swap(next);
  }
  out = std::move(cur);
}

void KroneckerChain::apply(const Vector& v, Vector& out) const { contract(v, out, false); }

void KroneckerChain::apply_transpose(const Vector& v, Vector& out) const { contract(v, out, true); }

Matrix KroneckerChain::to_dense() const {
  Matrix dense = factors_.front().matrix();
  for (size_t k = 1; k < factors_.size(); ++k) {
    const Matrix& b = factors_[k].matrix();
    Matrix next(dense.rows() * b.rows(), dense.cols() * b.cols());
    for (Index i = 0; i < dense.rows(); ++i) {
      for (Index j = 0; j < dense.cols(); ++j) {
        next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = dense(i, j) * b;
      }
    }
    dense = std::move(next);
  }
  return dense;
}

}  // namespace ddc
