#include "ddc/models/entry_exit.hpp"

#include <string>

namespace ddc {

double entry_exit_flow_utility(double a_prev, double z1, double z2, double z3, double z4, double w, Index a,
                               const EntryExitParams& p) {
  if (a == 0) return 0.0;
  if (a != 1) throw InvalidArgument("entry_exit_flow_utility: action must be 0 or 1");
  const double vp = (p.vp0 + p.vp1 * z1 + p.vp2 * z2) * std::exp(w);
  const double fc = p.fc0 + p.fc1 * z3;
  const double ec = (1.0 - a_prev) * (p.ec0 + p.ec1 * z4);
  return vp - fc - ec;
}

LaggedActionKernel::LaggedActionKernel(std::shared_ptr<const MarkovKernel> exogenous, Matrix probs)
    : exo_(std::move(exogenous)), probs_(std::move(probs)) {
  if (!exo_) throw InvalidArgument("LaggedActionKernel: null exogenous kernel");
  n_ = exo_->size();
  lags_ = probs_.cols();
  require_size("LaggedActionKernel: states", lags_ * n_, probs_.rows());
}

void LaggedActionKernel::apply(const Vector& v, Vector& out) const {
  require_size("LaggedActionKernel::apply", size(), v.size());
  out.setZero(size());
  Vector ev(n_);
  for (Index a = 0; a < lags_; ++a) {
    exo_->apply(v.segment(a * n_, n_), ev);
    for (Index l = 0; l < lags_; ++l)
      out.segment(l * n_, n_).array() += probs_.col(a).segment(l * n_, n_).array() * ev.array();
  }
}

void LaggedActionKernel::apply_transpose(const Vector& v, Vector& out) const {
  require_size("LaggedActionKernel::apply_transpose", size(), v.size());
  out.resize(size());
  Vector mass(n_);
  Vector pushed(n_);
  for (Index a = 0; a < lags_; ++a) {
    mass.setZero();
    for (Index l = 0; l < lags_; ++l)
      mass.array() += v.segment(l * n_, n_).array() * probs_.col(a).segment(l * n_, n_).array();
    exo_->apply_transpose(mass, pushed);
    out.segment(a * n_, n_) = pushed;
  }
}

namespace {

std::vector<MarkovChain> exogenous_chains(const EntryExitParams& p) {
  const MarkovChain z = tauchen(p.z, p.m, p.width);
  const MarkovChain w = tauchen(p.w, p.m, p.width);
  return {z, z, z, z, w};
}

}  // namespace

EntryExitModel::EntryExitModel(const EntryExitParams& p) : params_(p) {
  if (!(p.beta > 0.0 && p.beta < 1.0)) throw InvalidArgument("EntryExitModel: beta must lie in (0,1)");
  StructuredChain chain = tensor_product_structured(exogenous_chains(p));
  exo_ = chain.kernel;
  const Index n = exo_->size();
  const RowMatrix& zp = chain.grid.points();

  RowMatrix pts(2 * n, 6);
  utilities_.resize(2 * n, 2);
  for (Index l = 0; l < 2; ++l) {
    for (Index s = 0; s < n; ++s) {
      const Index x = l * n + s;
      pts(x, 0) = static_cast<double>(l);
      pts.row(x).tail(5) = zp.row(s);
      utilities_(x, 0) = 0.0;
      utilities_(x, 1) =
          entry_exit_flow_utility(static_cast<double>(l), zp(s, 0), zp(s, 1), zp(s, 2), zp(s, 3), zp(s, 4), 1, p);
    }
  }
  grid_ = StateGrid::trusted(std::move(pts));
}

Matrix EntryExitModel::expected_value(const Vector& value) const {
  const Index n = exo_->size();
  require_size("EntryExitModel::expected_value", 2 * n, value.size());
  Matrix ev(2 * n, 2);
  Vector tmp(n);
  for (Index a = 0; a < 2; ++a) {
    exo_->apply(value.segment(a * n, n), tmp);
    ev.col(a).head(n) = tmp;
    ev.col(a).tail(n) = tmp;
  }
  return ev;
}

std::shared_ptr<const MarkovKernel> EntryExitModel::mixed_kernel(const Ccp& ccp) const {
  require_size("EntryExitModel::mixed_kernel", state_count(), ccp.states());
  require_size("EntryExitModel::mixed_kernel: actions", 2, ccp.actions());
  return std::make_shared<const LaggedActionKernel>(exo_, ccp.probs());
}

std::vector<TransitionKernel> EntryExitModel::dense_per_action(Index cap) const {
  const Index n = exo_->size();
  if (2 * n > cap) throw InvalidArgument("EntryExitModel::dense_per_action: state count exceeds cap");
  const Matrix pz = exo_->to_dense();
  std::vector<TransitionKernel> out;
  for (Index a = 0; a < 2; ++a) {
    Matrix k = Matrix::Zero(2 * n, 2 * n);
    k.block(0, a * n, n, n) = pz;
    k.block(n, a * n, n, n) = pz;
    out.emplace_back(std::move(k));
  }
  return out;
}

double entry_exit_dense_bytes(Index m) {
  const double states = 2.0 * std::pow(static_cast<double>(m), 5);
  return states * states * sizeof(double);
}

}  // namespace ddc
