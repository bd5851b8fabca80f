#include "ddc/models/storable.hpp"

#include <limits>
#include <string>

namespace ddc {

double storable_flow_utility(int c, int inventory, int j, double omega, const StorableTheta& theta, int i_max) {
  const int c_min = std::max(0, inventory + j - i_max);
  const int c_max = inventory + j;
  if (inventory < 0 || inventory > i_max || c < c_min || c > c_max) {
    throw InvalidArgument("storable_flow_utility: infeasible (I=" + std::to_string(inventory) +
                          ", j=" + std::to_string(j) + ", c=" + std::to_string(c) + ")");
  }
  const double scale = static_cast<double>(i_max);
  const double cs = c / scale;
  const double is = (inventory + j - c) / scale;
  return theta(0) * cs + theta(1) * cs * cs + theta(2) * is * is + (j > 0 ? theta(3) : 0.0) + omega;
}

namespace {

Vector offer_values(const std::vector<Offer>& offers, double theta5, const Vector& xi, const Vector& delta,
                    double j) {
  if (offers.empty()) throw InvalidArgument("inclusive value: empty choice set");
  Vector v(static_cast<Index>(offers.size()));
  for (size_t i = 0; i < offers.size(); ++i) {
    const Offer& o = offers[i];
    if (o.k < 0 || o.k >= xi.size() || o.l < 0 || o.l >= delta.size())
      throw InvalidArgument("inclusive value: offer index out of range");
    v(static_cast<Index>(i)) = theta5 * o.price + j * xi(o.k) + j * delta(o.l);
  }
  return v;
}

}  // namespace

double inclusive_value(const std::vector<Offer>& offers, double theta5, const Vector& xi, const Vector& delta,
                       double j) {
  return log_sum_exp(offer_values(offers, theta5, xi, delta, j));
}

Vector conditional_logit_share(const std::vector<Offer>& offers, double theta5, const Vector& xi,
                               const Vector& delta, double j) {
  const Vector v = offer_values(offers, theta5, xi, delta, j);
  Vector p = (v.array() - v.maxCoeff()).exp();
  return p / p.sum();
}

StorableGoodsModel::StorableGoodsModel(StorableParams params, Matrix omega_values,
                                       std::shared_ptr<const TransitionKernel> omega_kernel, Index state_cap)
    : params_(std::move(params)), omega_values_(std::move(omega_values)), omega_kernel_(std::move(omega_kernel)) {
  if (params_.pack_sizes.empty() || params_.pack_sizes.front() != 0)
    throw InvalidArgument("StorableGoodsModel: first pack size must be 0");
  for (size_t j = 1; j < params_.pack_sizes.size(); ++j)
    if (params_.pack_sizes[j] <= 0) throw InvalidArgument("StorableGoodsModel: pack sizes must be positive");
  if (params_.i_max < 1) throw InvalidArgument("StorableGoodsModel: i_max must be >= 1");
  if (!(params_.beta > 0.0 && params_.beta < 1.0)) throw InvalidArgument("StorableGoodsModel: beta must lie in (0,1)");
  if (!omega_kernel_) throw InvalidArgument("StorableGoodsModel: null inclusive-value kernel");
  require_size("StorableGoodsModel: inclusive-value columns", action_count() - 1, omega_values_.cols());
  require_size("StorableGoodsModel: inclusive-value kernel", omega_values_.rows(), omega_kernel_->size());
  if (!omega_values_.allFinite()) throw InvalidArgument("StorableGoodsModel: non-finite inclusive value");
  if (state_count() > state_cap)
    throw InvalidArgument("StorableGoodsModel: " + std::to_string(state_count()) + " states exceed cap " +
                          std::to_string(state_cap));

  const Index nb = omega_count();
  RowMatrix pts(state_count(), omega_values_.cols() + 1);
  for (Index s = 0; s < state_count(); ++s) {
    pts(s, 0) = inventory_of(s);
    pts.row(s).tail(omega_values_.cols()) = omega_values_.row(s % nb);
  }
  grid_ = StateGrid::trusted(std::move(pts));
}

StorableGoodsModel StorableGoodsModel::with_theta(const StorableTheta& theta) const {
  StorableParams p = params_;
  p.theta = theta;
  return StorableGoodsModel(p, omega_values_, omega_kernel_, state_count());
}

RowMatrix StorableGoodsModel::continuation(const Vector& value) const {
  require_size("StorableGoodsModel::continuation", state_count(), value.size());
  const Eigen::Map<const RowMatrix> v(value.data(), inventory_levels(), omega_count());
  return v * omega_kernel_->matrix().transpose();
}

double StorableGoodsModel::flow(int c, Index s, Index j) const {
  return storable_flow_utility(c, inventory_of(s), quantity(j), omega(s, j), params_.theta, params_.i_max);
}

StorableGoodsModel build_desk_storable(Index iv_bins, int i_max, const StorableTheta& theta, const StorableIvSpec& iv,
                                       double beta) {
  if (iv_bins < 1) throw InvalidArgument("build_desk_storable: iv_bins must be >= 1");
  StorableParams p;
  p.theta = theta;
  p.i_max = i_max;
  p.beta = beta;
  const Index q = static_cast<Index>(p.pack_sizes.size()) - 1;
  require_size("build_desk_storable: inclusive-value means", q, static_cast<Index>(iv.means.size()));

  if (iv_bins == 1) {
    Matrix omega(1, q);
    for (Index j = 0; j < q; ++j) omega(0, j) = iv.means[static_cast<size_t>(j)];
    return StorableGoodsModel(p, omega, std::make_shared<const TransitionKernel>(Matrix::Ones(1, 1)));
  }
  std::vector<MarkovChain> chains;
  for (Index j = 0; j < q; ++j) {
    const double mean = iv.means[static_cast<size_t>(j)];
    chains.push_back(tauchen(Ar1Spec{mean * (1.0 - iv.rho), iv.rho, iv.sigma}, iv_bins));
  }
  MarkovChain prod = tensor_product(chains);
  Matrix omega = prod.grid.points();
  return StorableGoodsModel(p, omega, std::make_shared<const TransitionKernel>(prod.kernel));
}

namespace {

/// Flow utility without the additive inclusive value, indexed by (c, I').
double base_utility(const StorableTheta& theta, double scale, int c, int next) {
  const double cs = c / scale;
  const double is = next / scale;
  return theta(0) * cs + theta(1) * cs * cs + theta(2) * is * is;
}

ConsumptionFn best_consumption(const StorableGoodsModel& model, const RowMatrix* w) {
  const Index m = model.state_count();
  const Index na = model.action_count();
  const int i_max = model.params().i_max;
  const double scale = i_max;
  const double beta = model.beta();
  const StorableTheta& theta = model.params().theta;
  ConsumptionFn out(m, na);
  for (Index s = 0; s < m; ++s) {
    const int inv = model.inventory_of(s);
    const Index b = model.bin_of(s);
    for (Index j = 0; j < na; ++j) {
      const int total = inv + model.quantity(j);
      const int c_min = std::max(0, total - i_max);
      int best_c = c_min;
      double best = -std::numeric_limits<double>::infinity();
      for (int c = c_min; c <= total; ++c) {
        double val = base_utility(theta, scale, c, total - c);
        if (w) val += beta * (*w)(total - c, b);
        if (val > best) {
          best = val;
          best_c = c;
        }
      }
      out(s, j) = best_c;
    }
  }
  return out;
}

Eigen::MatrixXi next_inventory_table(const StorableGoodsModel& model, const ConsumptionFn& c) {
  require_size("consumption rule rows", model.state_count(), c.rows());
  require_size("consumption rule columns", model.action_count(), c.cols());
  const int i_max = model.params().i_max;
  Eigen::MatrixXi next(c.rows(), c.cols());
  for (Index s = 0; s < c.rows(); ++s) {
    for (Index j = 0; j < c.cols(); ++j) {
      const int total = model.inventory_of(s) + model.quantity(j);
      const int lo = std::max(0, total - i_max);
      if (lo > total) throw InvalidArgument("consumption bounds empty at state " + std::to_string(s));
      if (c(s, j) < lo || c(s, j) > total) {
        throw InvalidArgument("consumption rule infeasible at (I=" + std::to_string(model.inventory_of(s)) +
                              ", j=" + std::to_string(model.quantity(j)) + ", c=" + std::to_string(c(s, j)) + ")");
      }
      next(s, j) = total - c(s, j);
    }
  }
  return next;
}

}  // namespace

ConsumptionFn consumption_update(const StorableGoodsModel& model, const Vector& value) {
  const RowMatrix w = model.continuation(value);
  return best_consumption(model, &w);
}

ConsumptionFn myopic_consumption(const StorableGoodsModel& model) { return best_consumption(model, nullptr); }

ConditionalValues storable_conditional_values(const StorableGoodsModel& model, const ConsumptionFn& c,
                                              const Vector& value) {
  const Eigen::MatrixXi next = next_inventory_table(model, c);
  const RowMatrix w = model.continuation(value);
  ConditionalValues v(model.state_count(), model.action_count());
  for (Index s = 0; s < v.rows(); ++s)
    for (Index j = 0; j < v.cols(); ++j)
      v(s, j) = model.flow(c(s, j), s, j) + model.beta() * w(next(s, j), model.bin_of(s));
  return v;
}

Vector storable_bellman(const StorableGoodsModel& model, const ConsumptionFn& c, const Vector& value) {
  const ConditionalValues v = storable_conditional_values(model, c, value);
  Vector out(v.rows());
  for (Index s = 0; s < v.rows(); ++s) out(s) = log_sum_exp(v.row(s)) + kEulerGamma;
  return out;
}

InventoryKernel::InventoryKernel(std::shared_ptr<const TransitionKernel> omega_kernel, Eigen::MatrixXi next_inventory,
                                 Matrix probs)
    : omega_(std::move(omega_kernel)), next_(std::move(next_inventory)), probs_(std::move(probs)) {
  if (!omega_) throw InvalidArgument("InventoryKernel: null inclusive-value kernel");
  nb_ = omega_->size();
  require_size("InventoryKernel: next-inventory rows", probs_.rows(), next_.rows());
  require_size("InventoryKernel: next-inventory columns", probs_.cols(), next_.cols());
  if (probs_.rows() % nb_ != 0) throw InvalidArgument("InventoryKernel: state count not a multiple of bins");
  levels_ = probs_.rows() / nb_;
  if (next_.size() > 0 && (next_.minCoeff() < 0 || next_.maxCoeff() >= levels_))
    throw InvalidArgument("InventoryKernel: next inventory out of range");
}

void InventoryKernel::apply(const Vector& v, Vector& out) const {
  require_size("InventoryKernel::apply", size(), v.size());
  const Eigen::Map<const RowMatrix> vm(v.data(), levels_, nb_);
  const RowMatrix w = vm * omega_->matrix().transpose();
  out.resize(size());
  for (Index s = 0; s < size(); ++s) {
    const Index b = s % nb_;
    double acc = 0.0;
    for (Index j = 0; j < probs_.cols(); ++j) acc += probs_(s, j) * w(next_(s, j), b);
    out(s) = acc;
  }
}

void InventoryKernel::apply_transpose(const Vector& v, Vector& out) const {
  require_size("InventoryKernel::apply_transpose", size(), v.size());
  RowMatrix g = RowMatrix::Zero(levels_, nb_);
  for (Index s = 0; s < size(); ++s) {
    const Index b = s % nb_;
    for (Index j = 0; j < probs_.cols(); ++j) g(next_(s, j), b) += v(s) * probs_(s, j);
  }
  out.resize(size());
  Eigen::Map<RowMatrix> om(out.data(), levels_, nb_);
  om.noalias() = g * omega_->matrix();
}

FixedConsumptionModel::FixedConsumptionModel(const StorableGoodsModel& model, ConsumptionFn consumption)
    : model_(model), consumption_(std::move(consumption)) {
  next_ = next_inventory_table(model_, consumption_);
  flow_.resize(model_.state_count(), model_.action_count());
  for (Index s = 0; s < flow_.rows(); ++s)
    for (Index j = 0; j < flow_.cols(); ++j) flow_(s, j) = model_.flow(consumption_(s, j), s, j);
}

Matrix FixedConsumptionModel::expected_value(const Vector& value) const {
  const RowMatrix w = model_.continuation(value);
  Matrix ev(flow_.rows(), flow_.cols());
  for (Index s = 0; s < ev.rows(); ++s)
    for (Index j = 0; j < ev.cols(); ++j) ev(s, j) = w(next_(s, j), model_.bin_of(s));
  return ev;
}

std::shared_ptr<const MarkovKernel> FixedConsumptionModel::mixed_kernel(const Ccp& ccp) const {
  require_size("FixedConsumptionModel::mixed_kernel", flow_.rows(), ccp.states());
  require_size("FixedConsumptionModel::mixed_kernel: actions", flow_.cols(), ccp.actions());
  return std::make_shared<const InventoryKernel>(model_.omega_kernel(), next_, ccp.probs());
}

}  // namespace ddc
