#include "retarget/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "retarget/error.hpp"

namespace retarget {

namespace {

// Mass of N(mu, h^2) on [a, b].
double interval_mass(double mu, double h, double a, double b) {
  const double s = 1.0 / (h * std::sqrt(2.0));
  return 0.5 * (std::erf((b - mu) * s) - std::erf((a - mu) * s));
}

Eigen::MatrixXd density(const std::vector<Eigen::Vector2d>& pts, const std::vector<double>& hx_edges,
                        const std::vector<double>& vz_edges, double h, double area) {
  const auto nx = static_cast<Eigen::Index>(hx_edges.size() - 1);
  const auto nz = static_cast<Eigen::Index>(vz_edges.size() - 1);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nz, nx);
  Eigen::VectorXd mu(nx), mv(nz);
  for (const auto& p : pts) {
    for (Eigen::Index i = 0; i < nx; ++i) mu[i] = interval_mass(p.x(), h, hx_edges[i], hx_edges[i + 1]);
    for (Eigen::Index k = 0; k < nz; ++k) mv[k] = interval_mass(p.y(), h, vz_edges[k], vz_edges[k + 1]);
    d.noalias() += mv * mu.transpose();
  }
  return d / (static_cast<double>(pts.size()) * area);
}

std::vector<double> edges(double lo, double hi, int n) {
  std::vector<double> e(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) e[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / n;
  return e;
}

}  // namespace

Heatmap workspace_heatmap(const std::vector<Episode>& episodes, const HeatmapSpec& spec) {
  if (!(spec.bandwidth > 0.0)) throw ValidationError("heatmap: bandwidth must be positive");
  if (spec.nx < 2 || spec.nz < 2) throw ValidationError("heatmap: grid needs at least 2 cells per axis");
  const int a = spec.plane.horizontal, b = spec.plane.vertical;
  if (a < 0 || a > 2 || b < 0 || b > 2 || a == b) throw ValidationError("heatmap: invalid axis pair");

  std::vector<Eigen::Vector2d> left, right;
  for (const auto& ep : episodes)
    for (const auto& s : ep.steps) {
      left.emplace_back(s.left_wrist.position()[a], s.left_wrist.position()[b]);
      right.emplace_back(s.right_wrist.position()[a], s.right_wrist.position()[b]);
    }
  if (left.empty()) throw ValidationError("heatmap: no hand positions");

  auto range = [&](int coord, const std::optional<std::pair<double, double>>& fixed) {
    if (fixed) return *fixed;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* set : {&left, &right})
      for (const auto& p : *set) {
        lo = std::min(lo, p[coord]);
        hi = std::max(hi, p[coord]);
      }
    return std::pair{lo - 4.0 * spec.bandwidth, hi + 4.0 * spec.bandwidth};
  };
  const auto [hlo, hhi] = range(0, spec.horizontal_range);
  const auto [vlo, vhi] = range(1, spec.vertical_range);
  if (!(hlo < hhi) || !(vlo < vhi)) throw ValidationError("heatmap: empty grid range");

  Heatmap m;
  m.plane = spec.plane;
  const auto he = edges(hlo, hhi, spec.nx);
  const auto ve = edges(vlo, vhi, spec.nz);
  for (int i = 0; i < spec.nx; ++i) m.horizontal.push_back(0.5 * (he[i] + he[i + 1]));
  for (int k = 0; k < spec.nz; ++k) m.vertical.push_back(0.5 * (ve[k] + ve[k + 1]));
  m.cell_area = (hhi - hlo) / spec.nx * (vhi - vlo) / spec.nz;
  m.left = density(left, he, ve, spec.bandwidth, m.cell_area);
  m.right = density(right, he, ve, spec.bandwidth, m.cell_area);
  return m;
}

std::string heatmap_csv(const Heatmap& map, const Eigen::MatrixXd& density) {
  static constexpr const char* kAxis = "xyz";
  std::ostringstream os;
  os.precision(17);
  os << kAxis[map.plane.vertical] << '\\' << kAxis[map.plane.horizontal];
  for (double u : map.horizontal) os << ',' << u;
  os << '\n';
  for (Eigen::Index k = 0; k < density.rows(); ++k) {
    os << map.vertical[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < density.cols(); ++i) os << ',' << density(k, i);
    os << '\n';
  }
  return os.str();
}

}  // namespace retarget
