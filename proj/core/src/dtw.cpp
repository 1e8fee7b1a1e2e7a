#include "retarget/dtw.hpp"

#include <algorithm>
#include <limits>

#include "retarget/error.hpp"

namespace retarget {

double euclidean_metric(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  return (a - b).norm();
}

PointMetric scaled_euclidean(Eigen::VectorXd scale) {
  if (!(scale.array() > 0.0).all()) throw ValidationError("scaled_euclidean: scales must be positive");
  return [s = Eigen::VectorXd(scale.cwiseInverse())](const Eigen::Ref<const Eigen::VectorXd>& a,
                                                      const Eigen::Ref<const Eigen::VectorXd>& b) {
    return (a - b).cwiseProduct(s).norm();
  };
}

namespace {

void check_inputs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0 || b.cols() == 0) throw ValidationError("dtw: empty sequence");
  if (a.rows() != b.rows()) throw ValidationError("dtw: sequences have different point dimensions");
}

Eigen::MatrixXd coarsen(const Eigen::MatrixXd& x) {
  const Eigen::Index n = (x.cols() + 1) / 2;
  Eigen::MatrixXd out(x.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = 2 * i;
    out.col(i) = j + 1 < x.cols() ? Eigen::VectorXd(0.5 * (x.col(j) + x.col(j + 1))) : Eigen::VectorXd(x.col(j));
  }
  return out;
}

// Projects a coarse path to the fine grid and widens it by `radius` fine cells.
DtwWindow expand_window(const std::vector<std::pair<std::size_t, std::size_t>>& coarse, std::size_t n, std::size_t m,
                        std::size_t radius) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  DtwWindow w(n, {kNone, 0});
  auto mark = [&](std::size_t i, std::size_t lo, std::size_t hi) {
    if (i >= n) return;
    hi = std::min(hi, m - 1);
    if (w[i].first == kNone) {
      w[i] = {lo, hi};
    } else {
      w[i].first = std::min(w[i].first, lo);
      w[i].second = std::max(w[i].second, hi);
    }
  };
  for (const auto& [ci, cj] : coarse) {
    const std::size_t i0 = 2 * ci, j0 = 2 * cj;
    const std::size_t ilo = i0 >= radius ? i0 - radius : 0;
    const std::size_t jlo = j0 >= radius ? j0 - radius : 0;
    for (std::size_t i = ilo; i <= i0 + 1 + radius; ++i) mark(i, jlo, j0 + 1 + radius);
  }
  // Every fine row is covered by some projected coarse cell; the envelopes
  // below only widen the window so the corners stay connected.
  for (std::size_t i = 0; i < n; ++i)
    if (w[i].first == kNone) w[i] = i > 0 ? w[i - 1] : std::pair<std::size_t, std::size_t>{0, 0};
  w[0].first = 0;
  w[n - 1].second = m - 1;
  for (std::size_t i = 1; i < n; ++i) w[i].second = std::max(w[i].second, w[i - 1].second);
  for (std::size_t i = n - 1; i-- > 0;) w[i].first = std::min(w[i].first, w[i + 1].first);
  for (std::size_t i = 1; i < n; ++i) w[i].first = std::min(w[i].first, w[i - 1].second + 1);
  return w;
}

}  // namespace

DtwResult dtw_windowed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const DtwWindow& window,
                       const PointMetric& metric) {
  check_inputs(a, b);
  const auto n = static_cast<std::size_t>(a.cols()), m = static_cast<std::size_t>(b.cols());
  if (window.size() != n) throw ValidationError("dtw: window needs one interval per row");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> acc(n);
  auto at = [&](std::size_t i, std::size_t j) {
    const auto& [lo, hi] = window[i];
    return (j < lo || j > hi) ? kInf : acc[i][j - lo];
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = window[i];
    if (lo > hi || hi >= m) throw ValidationError("dtw: invalid window interval");
    acc[i].assign(hi - lo + 1, kInf);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double c = metric(a.col(static_cast<Eigen::Index>(i)), b.col(static_cast<Eigen::Index>(j)));
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0 && j > 0) best = at(i - 1, j - 1);
        if (i > 0) best = std::min(best, at(i - 1, j));
        if (j > 0) best = std::min(best, at(i, j - 1));
      }
      acc[i][j - lo] = c + best;
    }
  }
  DtwResult r;
  r.distance = at(n - 1, m - 1);
  if (!(r.distance < kInf)) throw ValidationError("dtw: window does not connect the corners");
  std::size_t i = n - 1, j = m - 1;
  r.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double d = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
      if (d <= up && d <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    r.path.emplace_back(i, j);
  }
  std::reverse(r.path.begin(), r.path.end());
  return r;
}

DtwResult dtw_exact(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const PointMetric& metric) {
  check_inputs(a, b);
  const DtwWindow full(static_cast<std::size_t>(a.cols()), {0, static_cast<std::size_t>(b.cols()) - 1});
  return dtw_windowed(a, b, full, metric);
}

DtwResult dtw_fast(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::size_t radius, const PointMetric& metric) {
  check_inputs(a, b);
  const auto min_size = 2 * (radius + 2);
  if (static_cast<std::size_t>(a.cols()) <= min_size || static_cast<std::size_t>(b.cols()) <= min_size) {
    DtwResult r = dtw_exact(a, b, metric);
    r.exact = false;
    return r;
  }
  const DtwResult coarse = dtw_fast(coarsen(a), coarsen(b), radius, metric);
  DtwResult r = dtw_windowed(
      a, b, expand_window(coarse.path, static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(b.cols()), radius),
      metric);
  r.exact = false;
  return r;
}

}  // namespace retarget
