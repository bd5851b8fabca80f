#include "ddc/models/bus_engine.hpp"

#include <string>

namespace ddc {

namespace {

Index grid_size(const BusEngineParams& p) { return static_cast<Index>(std::llround(p.cap / p.step)) + 1; }

StateGrid bus_grid(const BusEngineParams& p) {
  const Index m = grid_size(p);
  RowMatrix pts(m, 1);
  for (Index i = 0; i < m; ++i) pts(i, 0) = p.step * static_cast<double>(i);
  return StateGrid::trusted(std::move(pts));
}

Matrix bus_utilities(const BusEngineParams& p) {
  const Index m = grid_size(p);
  Matrix u(m, 2);
  for (Index i = 0; i < m; ++i) {
    const double x = p.step * static_cast<double>(i);
    u(i, kReplace) = bus_flow_utility(x, kReplace, p);
    u(i, kMaintain) = bus_flow_utility(x, kMaintain, p);
  }
  return u;
}

std::vector<TransitionKernel> bus_kernels(const BusEngineParams& p) {
  const Index m = grid_size(p);
  Matrix keep(m, m);
  Matrix replace(m, m);
  const Vector reset = bus_transition(0.0, kMaintain, p).transpose();
  for (Index i = 0; i < m; ++i) {
    keep.row(i) = bus_transition(p.step * static_cast<double>(i), kMaintain, p).transpose();
    replace.row(i) = reset.transpose();
  }
  return {TransitionKernel(std::move(replace)), TransitionKernel(std::move(keep))};
}

BusEngineParams validated(const BusEngineParams& p) {
  if (!(p.step > 0.0) || !(p.cap > 0.0)) throw InvalidArgument("BusEngineModel: step and cap must be positive");
  if (!(p.theta2 > 0.0)) throw InvalidArgument("BusEngineModel: theta2 must be positive");
  const double n = p.cap / p.step;
  if (std::abs(n - std::round(n)) > 1e-9) throw InvalidArgument("BusEngineModel: cap must be a multiple of step");
  return p;
}

}  // namespace

Index bus_index(double x, const BusEngineParams& p) {
  const double k = x / p.step;
  const double r = std::round(k);
  if (!(std::abs(k - r) <= 1e-9) || r < 0.0 || r > std::round(p.cap / p.step)) {
    throw InvalidArgument("bus engine: mileage " + std::to_string(x) + " is not on the grid");
  }
  return static_cast<Index>(r);
}

Vector bus_transition(double x, Index a, const BusEngineParams& p) {
  const Index m = grid_size(p);
  const Index from = a == kReplace ? 0 : bus_index(x, p);
  if (a != kReplace && a != kMaintain) throw InvalidArgument("bus_transition: action must be 0 or 1");
  const double origin = p.step * static_cast<double>(from);
  Vector row = Vector::Zero(m);
  for (Index k = from; k + 1 < m; ++k) {
    const double lo = p.step * static_cast<double>(k) - origin;
    row(k) = std::exp(-p.theta2 * lo) - std::exp(-p.theta2 * (lo + p.step));
  }
  row(m - 1) = std::exp(-p.theta2 * (p.cap - origin));
  return row;
}

double bus_flow_utility(double x, Index a, const BusEngineParams& p) {
  if (a == kReplace) return p.rc;
  if (a == kMaintain) return p.theta1 * std::min(x, p.cap);
  throw InvalidArgument("bus_flow_utility: action must be 0 or 1");
}

BusEngineModel::BusEngineModel(const BusEngineParams& p)
    : DenseDdcModel(bus_grid(validated(p)), p.beta, bus_utilities(p), bus_kernels(p)), params_(p) {}

}  // namespace ddc
