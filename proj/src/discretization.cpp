#include "ddc/discretization.hpp"

#include <string>

namespace ddc {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

MarkovChain tauchen(const Ar1Spec& spec, Index m, double width) {
  if (!(std::abs(spec.rho) < 1.0)) throw InvalidArgument("tauchen: |rho| must be < 1");
  if (!(spec.sigma > 0.0)) throw InvalidArgument("tauchen: sigma must be positive");
  if (m < 2) throw InvalidArgument("tauchen: need at least 2 points");
  if (!(width > 0.0)) throw InvalidArgument("tauchen: width must be positive");

  const double mu = spec.mean();
  const double half = width * spec.stationary_sd();
  const double step = 2.0 * half / static_cast<double>(m - 1);
  RowMatrix pts(m, 1);
  for (Index i = 0; i < m; ++i) pts(i, 0) = mu - half + step * static_cast<double>(i);

  Matrix p(m, m);
  for (Index i = 0; i < m; ++i) {
    const double cond = spec.intercept + spec.rho * pts(i, 0);
    // Cumulative mass at bin edges; F(-inf) = 0 and F(+inf) = 1 by construction.
    double prev = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double next = j + 1 < m ? normal_cdf((pts(j, 0) + 0.5 * step - cond) / spec.sigma) : 1.0;
      p(i, j) = next - prev;
      prev = next;
    }
  }
  return {StateGrid::trusted(std::move(pts)), TransitionKernel(std::move(p))};
}

StateGrid product_grid(const std::vector<StateGrid>& grids) {
  if (grids.empty()) throw InvalidArgument("product_grid: empty list");
  Index total = 1;
  Index dim = 0;
  for (const auto& g : grids) {
    total *= g.count();
    dim += g.dim();
  }
  RowMatrix pts(total, dim);
  for (Index s = 0; s < total; ++s) {
    Index rem = s;
    Index col = dim;
    for (auto it = grids.rbegin(); it != grids.rend(); ++it) {
      const Index k = rem % it->count();
      rem /= it->count();
      col -= it->dim();
      pts.row(s).segment(col, it->dim()) = it->point(k);
    }
  }
  return StateGrid::trusted(std::move(pts));
}

MarkovChain tensor_product(const std::vector<MarkovChain>& chains, Index cap) {
  if (chains.empty()) throw InvalidArgument("tensor_product: empty list");
  if (chains.size() == 1) return chains.front();
  Index total = 1;
  for (const auto& c : chains) {
    total *= c.grid.count();
    if (total > cap) {
      throw InvalidArgument("tensor_product: product size exceeds cap " + std::to_string(cap));
    }
  }
  std::vector<StateGrid> grids;
  std::vector<TransitionKernel> kernels;
  for (const auto& c : chains) {
    grids.push_back(c.grid);
    kernels.push_back(c.kernel);
  }
  return {product_grid(grids), TransitionKernel(KroneckerChain(std::move(kernels)).to_dense())};
}

StructuredChain tensor_product_structured(const std::vector<MarkovChain>& chains) {
  if (chains.empty()) throw InvalidArgument("tensor_product_structured: empty list");
  std::vector<StateGrid> grids;
  std::vector<TransitionKernel> kernels;
  for (const auto& c : chains) {
    grids.push_back(c.grid);
    kernels.push_back(c.kernel);
  }
  return {product_grid(grids), std::make_shared<const KroneckerChain>(std::move(kernels))};
}

StateGrid regular_grid(int d, Index m_per_dim, Index cap) {
  if (d < 1) throw InvalidArgument("regular_grid: d must be >= 1");
  if (m_per_dim < 1) throw InvalidArgument("regular_grid: m_per_dim must be >= 1");
  Index total = 1;
  for (int k = 0; k < d; ++k) {
    total *= m_per_dim;
    if (total > cap) throw InvalidArgument("regular_grid: size exceeds cap " + std::to_string(cap));
  }
  RowMatrix axis(m_per_dim, 1);
  for (Index i = 0; i < m_per_dim; ++i)
    axis(i, 0) = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(m_per_dim));
  const StateGrid one = StateGrid::trusted(axis);
  return product_grid(std::vector<StateGrid>(static_cast<size_t>(d), one));
}

double radical_inverse(unsigned long long i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

namespace {

std::vector<unsigned> first_primes(int n) {
  std::vector<unsigned> out;
  for (unsigned c = 2; static_cast<int>(out.size()) < n; ++c) {
    bool prime = true;
    for (unsigned p : out) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) out.push_back(c);
  }
  return out;
}

}  // namespace

StateGrid hammersley(int d, Index m) {
  if (d < 1) throw InvalidArgument("hammersley: d must be >= 1");
  if (m < 1) throw InvalidArgument("hammersley: m must be >= 1");
  const auto primes = first_primes(d - 1);
  RowMatrix pts(m, d);
  for (Index i = 0; i < m; ++i) {
    pts(i, 0) = static_cast<double>(i) / static_cast<double>(m);
    for (int k = 1; k < d; ++k)
      pts(i, k) = radical_inverse(static_cast<unsigned long long>(i), primes[static_cast<size_t>(k - 1)]);
  }
  return StateGrid::trusted(std::move(pts));
}

TransitionKernel normalize_kernel(const DensityField& f, const StateGrid& grid) {
  const Index m = grid.count();
  Matrix p(m, m);
  for (Index i = 0; i < m; ++i) {
    const Eigen::RowVectorXd x = grid.point(i);
    for (Index j = 0; j < m; ++j) {
      const double v = f(grid.point(j), x);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidArgument("normalize_kernel: density must be finite and nonnegative (state " +
                              std::to_string(i) + ")");
      }
      p(i, j) = v;
    }
    const double s = p.row(i).sum();
    if (!(s > 0.0)) throw InvalidArgument("normalize_kernel: zero row sum at state " + std::to_string(i));
    p.row(i) /= s;
  }
  return TransitionKernel(std::move(p));
}

double interpolate_off_grid(const Vector& value, const std::function<double(const Eigen::RowVectorXd&)>& u_fn,
                            const DensityField& f, double beta, const StateGrid& grid,
                            const Eigen::RowVectorXd& x) {
  require_size("interpolate_off_grid", grid.count(), value.size());
  require_size("interpolate_off_grid: point dimension", grid.dim(), x.size());
  double norm = 0.0;
  double acc = 0.0;
  for (Index i = 0; i < grid.count(); ++i) {
    const double w = f(grid.point(i), x);
    norm += w;
    acc += w * value(i);
  }
  if (!(norm > 0.0)) throw InvalidArgument("interpolate_off_grid: zero normalizer");
  return u_fn(x) + beta * acc / norm;
}

}  // namespace ddc
