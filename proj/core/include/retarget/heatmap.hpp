#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "retarget/episode.hpp"

namespace retarget {

// Projection plane given as two position axes (0 = x, 1 = y, 2 = z).
struct AxisPair {
  int horizontal = 0;
  int vertical = 2;
};

struct HeatmapSpec {
  AxisPair plane;
  int nx = 64;              // cells along the horizontal axis
  int nz = 64;              // cells along the vertical axis
  double bandwidth = 0.05;  // m, isotropic Gaussian kernel
  // Grid bounds; by default the data range padded by 4 bandwidths.
  std::optional<std::pair<double, double>> horizontal_range;
  std::optional<std::pair<double, double>> vertical_range;
};

/// Kernel density of hand positions on a regular grid.
///
/// Each cell stores the kernel mass falling in the cell divided by the cell
/// area, so summing cell * area gives the mass captured by the grid (1 up to
/// the tails cut off by the bounds).
struct Heatmap {
  AxisPair plane;
  std::vector<double> horizontal;  // cell centers
  std::vector<double> vertical;
  double cell_area = 0.0;
  Eigen::MatrixXd left;   // nz x nx
  Eigen::MatrixXd right;  // nz x nx

  double integral(const Eigen::MatrixXd& density) const { return density.sum() * cell_area; }
};

Heatmap workspace_heatmap(const std::vector<Episode>& episodes, const HeatmapSpec& spec);

// Header row: blank corner then horizontal coordinates; each following row
// starts with its vertical coordinate.
std::string heatmap_csv(const Heatmap& map, const Eigen::MatrixXd& density);

}  // namespace retarget
