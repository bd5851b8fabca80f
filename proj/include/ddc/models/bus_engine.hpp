#pragma once

#include "ddc/policy.hpp"

namespace ddc {

struct BusEngineParams {
  double theta1 = -0.15;
  double theta2 = 1.0;
  double rc = -2.0;
  double beta = 0.9;
  double step = 0.125;
  double cap = 25.0;
};

/// Action 0 replaces the engine, action 1 keeps it.
inline constexpr Index kReplace = 0;
inline constexpr Index kMaintain = 1;

/// Mileage x maps to index round(x / step); throws for off-grid x.
Index bus_index(double x, const BusEngineParams& p = {});

/// Distribution of next-period mileage on the grid.
Vector bus_transition(double x, Index a, const BusEngineParams& p = {});

/// theta1 min(x, cap) when maintaining, rc when replacing.
double bus_flow_utility(double x, Index a, const BusEngineParams& p = {});

class BusEngineModel : public DenseDdcModel {
 public:
  explicit BusEngineModel(const BusEngineParams& p = {});
  const BusEngineParams& params() const { return params_; }

 private:
  BusEngineParams params_;
};

}  // namespace ddc
