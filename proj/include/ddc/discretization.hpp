#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "ddc/state_grid.hpp"
#include "ddc/transition_kernel.hpp"

namespace ddc {

/// x' = intercept + rho x + sigma e, e ~ N(0,1).
struct Ar1Spec {
  double intercept = 0.0;
  double rho = 0.0;
  double sigma = 1.0;

  double mean() const { return intercept / (1.0 - rho); }
  double stationary_sd() const { return sigma / std::sqrt(1.0 - rho * rho); }
};

struct MarkovChain {
  StateGrid grid;
  TransitionKernel kernel;
};

/// Largest product grid `tensor_product` and `regular_grid` will materialize.
inline constexpr Index kDenseStateCap = 10'000;

/// Tauchen discretization on m equally spaced points covering mean +/- width
/// stationary standard deviations. End bins absorb the tails.
MarkovChain tauchen(const Ar1Spec& spec, Index m, double width = 3.0);

/// Product chain with independent components; last factor varies fastest.
MarkovChain tensor_product(const std::vector<MarkovChain>& chains, Index cap = kDenseStateCap);

/// Product grid only, paired with a structured Kronecker kernel.
struct StructuredChain {
  StateGrid grid;
  std::shared_ptr<const KroneckerChain> kernel;
};
StructuredChain tensor_product_structured(const std::vector<MarkovChain>& chains);

/// Cartesian product of grids, last grid varying fastest.
StateGrid product_grid(const std::vector<StateGrid>& grids);

/// Midpoints {1/(2m), 3/(2m), ..., (2m-1)/(2m)} in each of d dimensions.
StateGrid regular_grid(int d, Index m_per_dim, Index cap = kDenseStateCap);

/// Radical inverse of i in the given base.
double radical_inverse(unsigned long long i, unsigned base);

/// Point i = (i/m, phi_2(i), phi_3(i), ...) in the first d-1 primes.
StateGrid hammersley(int d, Index m);

/// f(x' | x).
using DensityField = std::function<double(const Eigen::RowVectorXd& x_next, const Eigen::RowVectorXd& x)>;

/// Row i holds f(x_j | x_i) / sum_k f(x_k | x_i).
TransitionKernel normalize_kernel(const DensityField& f, const StateGrid& grid);

/// u(x) + beta sum_i f~(x_i | x) V(x_i) at an arbitrary point x.
double interpolate_off_grid(const Vector& value, const std::function<double(const Eigen::RowVectorXd&)>& u_fn,
                            const DensityField& f, double beta, const StateGrid& grid,
                            const Eigen::RowVectorXd& x);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace ddc
