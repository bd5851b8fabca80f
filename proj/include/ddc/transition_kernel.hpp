#pragma once

#include <memory>
#include <vector>

#include "ddc/linalg.hpp"

namespace ddc {

inline constexpr double kRowSumTolerance = 1e-12;

/// A row-stochastic linear map on functions over M states.
///
/// `apply` computes P v (conditional expectation of v one step ahead),
/// `apply_transpose` computes P^T v (pushes a measure forward). Implementations
/// are immutable and safe to share across threads.
class MarkovKernel {
 public:
  virtual ~MarkovKernel() = default;

  virtual Index size() const = 0;
  virtual void apply(const Vector& v, Vector& out) const = 0;
  virtual void apply_transpose(const Vector& v, Vector& out) const = 0;

  /// Materialized matrix; the default probes unit vectors.
  virtual Matrix to_dense() const;

  Vector apply(const Vector& v) const {
    Vector out(size());
    apply(v, out);
    return out;
  }
  Vector apply_transpose(const Vector& v) const {
    Vector out(size());
    apply_transpose(v, out);
    return out;
  }
};

/// Dense row-stochastic M x M matrix. Construction validates nonnegativity
/// and unit row sums; nothing is renormalized.
class TransitionKernel final : public MarkovKernel {
 public:
  explicit TransitionKernel(Matrix matrix, double tol = kRowSumTolerance);

  Index size() const override { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  double operator()(Index i, Index j) const { return matrix_(i, j); }

  void apply(const Vector& v, Vector& out) const override;
  void apply_transpose(const Vector& v, Vector& out) const override;
  Matrix to_dense() const override { return matrix_; }

  using MarkovKernel::apply;
  using MarkovKernel::apply_transpose;

 private:
  Matrix matrix_;
};

/// Largest |row sum - 1| of a matrix.
double max_row_sum_error(const Matrix& m);

/// Kronecker product P_1 (x) P_2 (x) ... (x) P_n applied without forming it.
/// State index is lexicographic with the last factor varying fastest.
class KroneckerChain final : public MarkovKernel {
 public:
  explicit KroneckerChain(std::vector<TransitionKernel> factors);

  Index size() const override { return size_; }
  const std::vector<TransitionKernel>& factors() const { return factors_; }

  void apply(const Vector& v, Vector& out) const override;
  void apply_transpose(const Vector& v, Vector& out) const override;
  Matrix to_dense() const override;

  using MarkovKernel::apply;
  using MarkovKernel::apply_transpose;

 private:
  void contract(const Vector& v, Vector& out, bool transpose) const;

  std::vector<TransitionKernel> factors_;
  Index size_ = 1;
};

}  // namespace ddc
