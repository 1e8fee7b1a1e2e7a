#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace retarget {

/// Sequences are matrices whose columns are the points.
using PointMetric = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&, const Eigen::Ref<const Eigen::VectorXd>&)>;

double euclidean_metric(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

// Euclidean distance after dividing each dimension by `scale`.
PointMetric scaled_euclidean(Eigen::VectorXd scale);

struct DtwResult {
  double distance = 0.0;  // accumulated cost along the path
  std::vector<std::pair<std::size_t, std::size_t>> path;
  bool exact = true;

  // Accumulated cost divided by the path length.
  double per_step() const { return path.empty() ? 0.0 : distance / static_cast<double>(path.size()); }
};

DtwResult dtw_exact(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const PointMetric& metric = euclidean_metric);

/// FastDTW: coarsen both sequences by averaging pairs, solve recursively,
/// project the coarse path back, widen it by `radius` cells, and solve the DP
/// inside that window. Falls back to the exact DP when either sequence has at
/// most 2 * (radius + 2) points.
DtwResult dtw_fast(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::size_t radius = 1,
                   const PointMetric& metric = euclidean_metric);

// Column-wise inclusive [lo, hi] per row i of the cost matrix.
using DtwWindow = std::vector<std::pair<std::size_t, std::size_t>>;

// DP restricted to a window; the full window gives the exact result.
DtwResult dtw_windowed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const DtwWindow& window,
                       const PointMetric& metric);

}  // namespace retarget
