#pragma once

#include <memory>
#include <vector>

#include "ddc/discretization.hpp"
#include "ddc/policy.hpp"

namespace ddc {

/// Consumption/inventory/fixed-cost coefficients (theta1..theta4).
using StorableTheta = Eigen::Vector4d;

inline StorableTheta default_storable_theta() { return StorableTheta(2.020, -13.768, -3.197, -4.184); }

struct StorableParams {
  StorableTheta theta = default_storable_theta();
  /// Purchase quantities; the first must be 0 (no purchase).
  std::vector<int> pack_sizes{0, 23, 40, 64};
  int i_max = 80;
  double beta = 0.99;
};

/// theta1 (c/I) + theta2 (c/I)^2 + theta3 (I'/I)^2 + theta4 1{j>0} + omega with
/// I = i_max and I' = inventory + j - c. Throws when c or I' leaves its bounds.
double storable_flow_utility(int c, int inventory, int j, double omega, const StorableTheta& theta, int i_max = 80);

/// One product offered at a purchase quantity: price, brand k, characteristic l.
struct Offer {
  double price;
  Index k;
  Index l;
};

/// log sum_{k,l} exp(theta5 p + j xi_k + j delta_l).
double inclusive_value(const std::vector<Offer>& offers, double theta5, const Vector& xi, const Vector& delta,
                       double j);

/// Softmax of theta5 p + j xi_k + j delta_l over the offers.
Vector conditional_logit_share(const std::vector<Offer>& offers, double theta5, const Vector& xi,
                               const Vector& delta, double j);

/// Integer consumption C(s, j): one row per state, one column per quantity.
using ConsumptionFn = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Storable-goods demand with state s = I * n_omega + b, inventory I in
/// 0..i_max and b an inclusive-value bin with its own Markov chain.
class StorableGoodsModel {
 public:
  /// `omega_values` is n_omega x (J-1): inclusive value of each positive quantity per bin.
  StorableGoodsModel(StorableParams params, Matrix omega_values, std::shared_ptr<const TransitionKernel> omega_kernel,
                     Index state_cap = 200'000);

  const StorableParams& params() const { return params_; }
  const StateGrid& grid() const { return grid_; }
  Index inventory_levels() const { return params_.i_max + 1; }
  Index omega_count() const { return omega_values_.rows(); }
  Index state_count() const { return inventory_levels() * omega_count(); }
  Index action_count() const { return static_cast<Index>(params_.pack_sizes.size()); }
  double beta() const { return params_.beta; }

  Index state(int inventory, Index bin) const { return inventory * omega_count() + bin; }
  int inventory_of(Index s) const { return static_cast<int>(s / omega_count()); }
  Index bin_of(Index s) const { return s % omega_count(); }
  double omega(Index s, Index j) const { return j == 0 ? 0.0 : omega_values_(bin_of(s), j - 1); }
  int quantity(Index j) const { return params_.pack_sizes[static_cast<size_t>(j)]; }

  const Matrix& omega_values() const { return omega_values_; }
  const std::shared_ptr<const TransitionKernel>& omega_kernel() const { return omega_kernel_; }

  /// Same primitives with different utility coefficients.
  StorableGoodsModel with_theta(const StorableTheta& theta) const;

  /// W(I', b) = sum_b' P(b, b') V(I', b'), returned as (i_max+1) x n_omega.
  RowMatrix continuation(const Vector& value) const;

  double flow(int c, Index s, Index j) const;

 private:
  StorableParams params_;
  Matrix omega_values_;
  std::shared_ptr<const TransitionKernel> omega_kernel_;
  StateGrid grid_;
};

/// Inclusive-value process for the desk-scale instance: independent AR(1) per
/// positive quantity, Tauchen-discretized.
struct StorableIvSpec {
  std::vector<double> means{3.0, 3.5, 4.0};
  double rho = 0.6;
  double sigma = 0.8;
};

/// iv_bins^(J-1) inclusive-value bins times (i_max + 1) inventory levels.
/// iv_bins = 1 places every quantity's value at its mean.
StorableGoodsModel build_desk_storable(Index iv_bins, int i_max = 80, const StorableTheta& theta = default_storable_theta(),
                                       const StorableIvSpec& iv = {}, double beta = 0.99);

/// argmax_c u(c, I, j, omega) + beta W(I + j - c, b), ties to the lowest c.
ConsumptionFn consumption_update(const StorableGoodsModel& model, const Vector& value);

/// Consumption maximizing current utility alone.
ConsumptionFn myopic_consumption(const StorableGoodsModel& model);

/// Conditional values v(s, j) = u(C(s,j), I, j, omega) + beta W(I', b).
ConditionalValues storable_conditional_values(const StorableGoodsModel& model, const ConsumptionFn& c,
                                              const Vector& value);

/// V(s) = log sum_j exp v(s, j) + kappa under consumption rule C.
Vector storable_bellman(const StorableGoodsModel& model, const ConsumptionFn& c, const Vector& value);

/// Mixed kernel of the purchase policy with consumption fixed:
///   (P v)(I, b) = sum_j p(j | s) sum_b' P(b, b') v(I'(s, j), b').
class InventoryKernel final : public MarkovKernel {
 public:
  InventoryKernel(std::shared_ptr<const TransitionKernel> omega_kernel, Eigen::MatrixXi next_inventory, Matrix probs);

  Index size() const override { return probs_.rows(); }
  void apply(const Vector& v, Vector& out) const override;
  void apply_transpose(const Vector& v, Vector& out) const override;
  using MarkovKernel::apply;
  using MarkovKernel::apply_transpose;

 private:
  std::shared_ptr<const TransitionKernel> omega_;
  Eigen::MatrixXi next_;
  Matrix probs_;
  Index nb_;
  Index levels_;
};

/// Purchase-quantity choice problem with the consumption rule held fixed.
/// Keeps a reference to `model`, which must outlive it.
class FixedConsumptionModel : public DdcModel {
 public:
  FixedConsumptionModel(const StorableGoodsModel& model, ConsumptionFn consumption);

  const StateGrid& grid() const override { return model_.grid(); }
  Index action_count() const override { return model_.action_count(); }
  double beta() const override { return model_.beta(); }
  double flow_utility(Index x, Index a) const override { return flow_(x, a); }
  Matrix flow_utilities() const override { return flow_; }
  Matrix expected_value(const Vector& value) const override;
  std::shared_ptr<const MarkovKernel> mixed_kernel(const Ccp& ccp) const override;

  const Eigen::MatrixXi& next_inventory() const { return next_; }

 private:
  const StorableGoodsModel& model_;
  ConsumptionFn consumption_;
  Eigen::MatrixXi next_;
  Matrix flow_;
};

}  // namespace ddc
