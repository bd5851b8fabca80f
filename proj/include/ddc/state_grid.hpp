#pragma once

#include <vector>

#include "ddc/linalg.hpp"

namespace ddc {

/// Enumerated state space: one row of `points` per state.
class StateGrid {
 public:
  StateGrid() = default;

  /// Rejects empty grids and duplicate points.
  explicit StateGrid(RowMatrix points, std::vector<int> labels = {});

  /// Skips the O(M log M) duplicate check; for constructors that are unique by construction.
  static StateGrid trusted(RowMatrix points, std::vector<int> labels = {});

  Index count() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  const RowMatrix& points() const { return points_; }
  auto point(Index i) const { return points_.row(i); }
  const std::vector<int>& labels() const { return labels_; }

 private:
  RowMatrix points_;
  std::vector<int> labels_;
};

}  // namespace ddc
