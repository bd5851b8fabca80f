#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "ddc/error.hpp"

namespace ddc {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Norm { Sup, L2 };

template <typename Derived>
double norm_of(const Eigen::MatrixBase<Derived>& v, Norm which) {
  if (v.size() == 0) return 0.0;
  return which == Norm::Sup ? v.template lpNorm<Eigen::Infinity>() : v.norm();
}

template <typename Derived>
double sup_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.size() == 0 ? 0.0 : v.template lpNorm<Eigen::Infinity>();
}

/// ||v||_mu = sqrt(sum_i mu_i v_i^2)
inline double weighted_norm(const Vector& v, const Vector& mu) {
  return std::sqrt((mu.array() * v.array().square()).sum());
}

inline void require_size(const std::string& context, Index expected, Index actual) {
  if (expected != actual) throw DimensionError(context, expected, actual);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// log(sum(exp(x))) with max subtraction.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.derived().array() - m).exp().sum());
}

}  // namespace ddc
