#include "ddc/state_grid.hpp"

#include <algorithm>
#include <numeric>

namespace ddc {

namespace {

void check_shape(const RowMatrix& points, const std::vector<int>& labels) {
  if (points.rows() < 1) throw InvalidArgument("StateGrid: at least one point is required");
  if (points.cols() < 1) throw InvalidArgument("StateGrid: dimension must be positive");
  if (!points.allFinite()) throw InvalidArgument("StateGrid: non-finite coordinate");
  if (!labels.empty()) require_size("StateGrid labels", points.rows(), static_cast<Index>(labels.size()));
}

}  // namespace

StateGrid::StateGrid(RowMatrix points, std::vector<int> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  check_shape(points_, labels_);
  std::vector<Index> order(static_cast<size_t>(points_.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  auto row_less = [this](Index a, Index b) {
    for (Index d = 0; d < points_.cols(); ++d) {
      if (points_(a, d) != points_(b, d)) return points_(a, d) < points_(b, d);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  for (size_t i = 1; i < order.size(); ++i) {
    if (!row_less(order[i - 1], order[i])) {
      throw InvalidArgument("StateGrid: duplicate point at indices " + std::to_string(order[i - 1]) +
                            " and " + std::to_string(order[i]));
    }
  }
}

StateGrid StateGrid::trusted(RowMatrix points, std::vector<int> labels) {
  check_shape(points, labels);
  StateGrid g;
  g.points_ = std::move(points);
  g.labels_ = std::move(labels);
  return g;
}

}  // namespace ddc
