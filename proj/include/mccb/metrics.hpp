#pragma once

// Trajectory similarity metrics: SSE, DTWD, discrete Frechet distance and
// swept error area (2-D only).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mccb/dtw.hpp"
#include "mccb/error.hpp"
#include "mccb/trajectory.hpp"

namespace mccb::metrics {

namespace detail {

inline void require_same_dims(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.cols() != b.cols()) {
    throw config_error("metrics", std::string(what) + ": dimension mismatch (" + std::to_string(a.cols()) +
                                      " vs " + std::to_string(b.cols()) + ")");
  }
  if (a.rows() == 0 || b.rows() == 0) throw config_error("metrics", std::string(what) + ": empty trajectory");
}

inline void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  require_same_dims(a, b, what);
  if (a.rows() != b.rows()) {
    throw config_error("metrics", std::string(what) + ": length mismatch (" + std::to_string(a.rows()) + " vs " +
                                      std::to_string(b.rows()) + ")");
  }
}

// |cross(q - p, r - p)| / 2
inline double triangle_area(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
  const Eigen::Vector2d u = q - p;
  const Eigen::Vector2d v = r - p;
  return 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
}

}  // namespace detail

/// Sum over time of squared Euclidean errors.
inline double sse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  detail::require_same_shape(a, b, "sse");
  return (a - b).squaredNorm();
}

/// DTW cost normalized by the length of the optimal warping path.
inline double dtwd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  detail::require_same_dims(a, b, "dtwd");
  return dtw::align(a, b).normalized();
}

/// Discrete Frechet distance: min over monotone couplings of the max pair distance.
inline double frechet(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  detail::require_same_dims(a, b, "frechet");
  const Eigen::Index ta = a.rows();
  const Eigen::Index tb = b.rows();
  std::vector<double> prev(static_cast<std::size_t>(tb));
  std::vector<double> cur(static_cast<std::size_t>(tb));
  for (Eigen::Index i = 0; i < ta; ++i) {
    for (Eigen::Index j = 0; j < tb; ++j) {
      const double d = (a.row(i) - b.row(j)).norm();
      const auto uj = static_cast<std::size_t>(j);
      double reach = 0.0;
      if (i == 0 && j == 0) {
        reach = d;
      } else {
        double best = std::numeric_limits<double>::infinity();
        if (i > 0) best = std::min(best, prev[uj]);
        if (j > 0) best = std::min(best, cur[uj - 1]);
        if (i > 0 && j > 0) best = std::min(best, prev[uj - 1]);
        reach = std::max(best, d);
      }
      cur[uj] = reach;
    }
    std::swap(prev, cur);
  }
  return prev[static_cast<std::size_t>(tb - 1)];
}

/// Swept error area between two equally sampled planar trajectories. Each quadrilateral
/// (a(t), a(t+1), b(t+1), b(t)) is split on the diagonal a(t)-b(t+1) and the absolute
/// areas of the two triangles are added.
inline double sea(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  detail::require_same_shape(a, b, "sea");
  if (a.cols() != 2) throw config_error("metrics", "sea: defined for 2-D trajectories only");
  double area = 0.0;
  for (Eigen::Index t = 0; t + 1 < a.rows(); ++t) {
    const Eigen::Vector2d a0 = a.row(t).transpose();
    const Eigen::Vector2d a1 = a.row(t + 1).transpose();
    const Eigen::Vector2d b0 = b.row(t).transpose();
    const Eigen::Vector2d b1 = b.row(t + 1).transpose();
    area += detail::triangle_area(a0, a1, b1) + detail::triangle_area(a0, b1, b0);
  }
  return area;
}

struct MetricReport {
  double sse = 0.0;
  double dtwd = 0.0;
  double frechet = 0.0;
  std::optional<double> sea;  // present iff n == 2
};

/// All applicable metrics for a reproduction `a` against a demonstration `b`.
inline MetricReport evaluate(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  MetricReport r;
  r.sse = sse(a, b);
  r.dtwd = dtwd(a, b);
  r.frechet = frechet(a, b);
  if (a.cols() == 2) r.sea = sea(a, b);
  return r;
}

inline MetricReport evaluate(const Trajectory& a, const Trajectory& b) { return evaluate(a.samples(), b.samples()); }

}  // namespace mccb::metrics
