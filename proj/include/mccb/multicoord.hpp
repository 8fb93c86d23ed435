#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mccb/diffops.hpp"
#include "mccb/error.hpp"
#include "mccb/gmm.hpp"
#include "mccb/trajectory.hpp"

namespace mccb {

enum class Coordinate { cartesian = 0, tangent = 1, laplacian = 2 };

inline constexpr std::array<Coordinate, 3> kCoordinates = {Coordinate::cartesian, Coordinate::tangent,
                                                           Coordinate::laplacian};

inline std::string_view to_string(Coordinate c) {
  switch (c) {
    case Coordinate::cartesian:
      return "cartesian";
    case Coordinate::tangent:
      return "tangent";
    case Coordinate::laplacian:
      return "laplacian";
  }
  return "?";
}

inline Coordinate coordinate_from_string(std::string_view s) {
  for (auto c : kCoordinates) {
    if (to_string(c) == s) return c;
  }
  throw config_error("multicoord", "unknown coordinate '" + std::string(s) + "'");
}

inline OperatorKind operator_kind(Coordinate c) {
  switch (c) {
    case Coordinate::cartesian:
      return OperatorKind::identity;
    case Coordinate::tangent:
      return OperatorKind::tangent;
    case Coordinate::laplacian:
      return OperatorKind::laplacian;
  }
  return OperatorKind::identity;
}

inline std::size_t slot(Coordinate c) { return static_cast<std::size_t>(c); }

/// Normalized time of index t on a horizon of T samples.
inline double normalized_time(Index t, Index horizon) {
  return static_cast<double>(t) / static_cast<double>(horizon - 1);
}

/// Stacks (normalized t, value) rows of every demo after transforming it into `coordinate`.
inline Eigen::MatrixXd joint_data(const DemonstrationSet& demos, Coordinate coordinate) {
  const Index T = demos.horizon();
  const Index n = demos.dims();
  const DiffOperator op(operator_kind(coordinate), T);
  Eigen::MatrixXd rows(T * static_cast<Index>(demos.size()), n + 1);
  for (std::size_t j = 0; j < demos.size(); ++j) {
    const Eigen::MatrixXd values = op.apply(demos[j]);
    const Index base = static_cast<Index>(j) * T;
    for (Index t = 0; t < T; ++t) {
      rows(base + t, 0) = normalized_time(t, T);
      rows.row(base + t).tail(n) = values.row(t);
    }
  }
  return rows;
}

struct TrainOptions {
  std::array<int, 3> components = {5, 5, 5};  // per coordinate
  std::array<std::uint64_t, 3> seeds = {0, 0, 0};
  EmConfig em;

  static TrainOptions uniform(int k, std::uint64_t seed) {
    TrainOptions o;
    o.components = {k, k, k};
    o.seeds = {seed, seed, seed};
    return o;
  }
};

struct CoordinateModel {
  GaussianMixture mixture;
  int components = 0;
  std::uint64_t seed = 0;
  double regularization = 0.0;
  int em_iterations = 0;
  bool em_converged = false;
};

/// Three independently fitted mixtures over one aligned demonstration set.
class MultiCoordModel {
 public:
  MultiCoordModel() = default;
  MultiCoordModel(std::array<CoordinateModel, 3> models, Index horizon, Index dims)
      : models_(std::move(models)), horizon_(horizon), dims_(dims) {
    if (horizon_ < Trajectory::kMinLength) throw config_error("multicoord", "model horizon must be at least 3");
    for (const auto& m : models_) {
      if (m.mixture.value_dims() != dims_) throw config_error("multicoord", "mixture dimension disagrees with model");
    }
  }

  [[nodiscard]] Index horizon() const noexcept { return horizon_; }
  [[nodiscard]] Index dims() const noexcept { return dims_; }
  [[nodiscard]] const CoordinateModel& model(Coordinate c) const { return models_[slot(c)]; }
  [[nodiscard]] const GaussianMixture& mixture(Coordinate c) const { return models_[slot(c)].mixture; }

 private:
  std::array<CoordinateModel, 3> models_;
  Index horizon_ = 0;
  Index dims_ = 0;
};

inline MultiCoordModel train(const DemonstrationSet& demos, const TrainOptions& options = {}) {
  if (!demos.aligned()) throw config_error("multicoord", "training requires time-aligned demonstrations");
  std::array<CoordinateModel, 3> models;
  for (auto c : kCoordinates) {
    const auto s = slot(c);
    EmFit fit;
    try {
      fit = fit_em(joint_data(demos, c), options.components[s], options.seeds[s], options.em);
    } catch (const Error& e) {
      throw Error(e.kind(), "multicoord", std::string(to_string(c)) + " model: " + e.what());
    }
    models[s] = {std::move(fit.mixture), options.components[s], options.seeds[s], fit.regularization,
                 fit.iterations, fit.converged};
  }
  return {std::move(models), demos.horizon(), demos.dims()};
}

/// Stacked GMR conditionals over the training horizon for one coordinate.
struct ConditionalProfile {
  Coordinate coordinate = Coordinate::cartesian;
  Eigen::MatrixXd means;                // T x n
  std::vector<Eigen::MatrixXd> blocks;  // T covariances, n x n
  bool extrapolated = false;

  [[nodiscard]] Index horizon() const { return means.rows(); }
  [[nodiscard]] Index dims() const { return means.cols(); }
};

inline ConditionalProfile profile(const MultiCoordModel& model, Coordinate coordinate) {
  const Index T = model.horizon();
  ConditionalProfile p;
  p.coordinate = coordinate;
  p.means.resize(T, model.dims());
  p.blocks.reserve(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) {
    auto cond = condition(model.mixture(coordinate), normalized_time(t, T));
    p.means.row(t) = cond.mean.transpose();
    p.blocks.push_back(std::move(cond.covariance));
    p.extrapolated = p.extrapolated || cond.extrapolated;
  }
  return p;
}

using ProfileSet = std::array<ConditionalProfile, 3>;

inline ProfileSet profiles(const MultiCoordModel& model) {
  return {profile(model, Coordinate::cartesian), profile(model, Coordinate::tangent),
          profile(model, Coordinate::laplacian)};
}

}  // namespace mccb
