#pragma once

// Synthetic point-to-point skill families with a known "relevant" coordinate.
// Used by the acceptance suite and the mccb_synth tool.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mccb/error.hpp"
#include "mccb/multicoord.hpp"
#include "mccb/trajectory.hpp"

namespace mccb::synthetic {

enum class Family {
  translated,  // one shape, rigidly translated per demo: shape carries the skill
  anchored,    // fixed endpoints, absolute positions carry the skill, shape jitters
  arcs,        // one curvature profile, endpoints stretched affinely per demo
  mixed,       // translated shape plus a smaller bump of varying height
};

/// The coordinate each family is built to reward.
inline Coordinate designed_coordinate(Family f) {
  switch (f) {
    case Family::anchored:
      return Coordinate::cartesian;
    case Family::arcs:
      return Coordinate::laplacian;
    case Family::translated:
    case Family::mixed:
      return Coordinate::tangent;
  }
  return Coordinate::cartesian;
}

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::translated:
      return "translated";
    case Family::anchored:
      return "anchored";
    case Family::arcs:
      return "arcs";
    case Family::mixed:
      return "mixed";
  }
  return "?";
}

inline Family family_from_string(std::string_view s) {
  for (auto f : {Family::translated, Family::anchored, Family::arcs, Family::mixed}) {
    if (to_string(f) == s) return f;
  }
  throw config_error("synthetic", "unknown family '" + std::string(s) + "'");
}

struct Options {
  std::size_t demos = 7;
  Index horizon = 200;
  std::uint64_t seed = 1;
  double noise = 0.005;  // std of i.i.d. Gaussian sensor noise added to every sample
};

namespace detail {

// Smooth planar base stroke on s in [0, 1].
inline Eigen::Vector2d stroke(double s) {
  const double pi = std::numbers::pi;
  return {10.0 * s + 2.0 * std::sin(2.0 * pi * s), 4.0 * std::sin(pi * s) + 1.5 * std::sin(3.0 * pi * s)};
}

// 1 at s = 0, smoothly 0 from s = 0.1 on
inline double fade(double s) {
  constexpr double width = 0.1;
  if (s >= width) return 0.0;
  const double u = 1.0 - s / width;
  return u * u * u;
}

inline double s_at(Index t, Index horizon) { return static_cast<double>(t) / static_cast<double>(horizon - 1); }

}  // namespace detail

inline DemonstrationSet generate(Family family, const Options& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double pi = std::numbers::pi;
  std::vector<Trajectory> demos;
  std::vector<std::string> labels;
  for (std::size_t j = 0; j < opt.demos; ++j) {
    Eigen::MatrixXd x(opt.horizon, 2);
    const Eigen::Vector2d offset(3.0 * normal(rng), 3.0 * normal(rng));
    const Eigen::Vector2d slope(2.5 * normal(rng), 2.5 * normal(rng));
    const std::array<double, 4> modes = {normal(rng), normal(rng), normal(rng), normal(rng)};
    for (Index t = 0; t < opt.horizon; ++t) {
      const double s = detail::s_at(t, opt.horizon);
      Eigen::Vector2d p = detail::stroke(s);
      switch (family) {
        case Family::translated:
          p += offset;
          break;
        case Family::anchored: {
          // independent start and goal offsets that fade out within 10% of the horizon;
          // the middle of the path is shared in absolute coordinates
          p += detail::fade(s) * 2.0 * Eigen::Vector2d(modes[0], modes[1]);
          p += detail::fade(1.0 - s) * 2.0 * Eigen::Vector2d(modes[2], modes[3]);
          break;
        }
        case Family::arcs: {
          const double r = 6.0;
          const double a = pi * s;
          p = Eigen::Vector2d(r * (1.0 - std::cos(a)), r * std::sin(a));
          p += offset + s * slope;
          break;
        }
        case Family::mixed:
          p += offset;
          p += Eigen::Vector2d(0.3 * modes[0] * std::sin(pi * s), 0.3 * modes[1] * std::sin(pi * s));
          break;
      }
      if (opt.noise > 0.0) p += opt.noise * Eigen::Vector2d(normal(rng), normal(rng));
      x.row(t) = p.transpose();
    }
    demos.emplace_back(std::move(x));
    labels.push_back(std::string(to_string(family)) + "_" + std::to_string(j));
  }
  return {std::move(demos), std::move(labels)};
}

}  // namespace mccb::synthetic
