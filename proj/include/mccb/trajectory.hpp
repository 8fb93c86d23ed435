#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mccb/dtw.hpp"
#include "mccb/error.hpp"

namespace mccb {

using Index = Eigen::Index;

/// Uniformly indexed sequence of n-dimensional samples, one row per time step.
class Trajectory {
 public:
  static constexpr Index kMinLength = 3;

  Trajectory() = default;

  explicit Trajectory(Eigen::MatrixXd samples, double dt = 1.0) : samples_(std::move(samples)), dt_(dt) {
    if (samples_.cols() < 1) throw config_error("trajectory", "trajectory needs at least one dimension");
    if (samples_.rows() < kMinLength) {
      throw config_error("trajectory", "trajectory needs at least " + std::to_string(kMinLength) +
                                           " samples, got " + std::to_string(samples_.rows()));
    }
    if (!samples_.allFinite()) throw config_error("trajectory", "non-finite sample");
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw config_error("trajectory", "sample spacing must be positive");
  }

  [[nodiscard]] Index length() const noexcept { return samples_.rows(); }
  [[nodiscard]] Index dims() const noexcept { return samples_.cols(); }
  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] const Eigen::MatrixXd& samples() const noexcept { return samples_; }

  [[nodiscard]] auto sample(Index t) const { return samples_.row(t); }
  [[nodiscard]] auto front() const { return samples_.row(0); }
  [[nodiscard]] auto back() const { return samples_.row(samples_.rows() - 1); }

  /// Largest pairwise distance between any two samples (used for relative tolerances).
  [[nodiscard]] double diameter() const {
    double d = 0.0;
    for (Index i = 0; i < length(); ++i) {
      for (Index j = i + 1; j < length(); ++j) d = std::max(d, (samples_.row(i) - samples_.row(j)).norm());
    }
    return d;
  }

 private:
  Eigen::MatrixXd samples_;
  double dt_ = 1.0;
};

/// N demonstrations of one skill. Raw sets may have ragged lengths; aligned sets share (T, n).
class DemonstrationSet {
 public:
  DemonstrationSet() = default;

  DemonstrationSet(std::vector<Trajectory> demos, std::vector<std::string> labels = {})
      : demos_(std::move(demos)), labels_(std::move(labels)) {
    if (demos_.empty()) throw config_error("trajectory", "demonstration set is empty");
    if (labels_.empty()) {
      for (std::size_t j = 0; j < demos_.size(); ++j) labels_.push_back("demo" + std::to_string(j));
    }
    if (labels_.size() != demos_.size()) throw config_error("trajectory", "label count does not match demo count");
    for (const auto& d : demos_) {
      if (d.dims() != demos_.front().dims()) {
        throw config_error("trajectory", "demonstrations disagree on dimension (" +
                                             std::to_string(d.dims()) + " vs " +
                                             std::to_string(demos_.front().dims()) + ")");
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return demos_.size(); }
  [[nodiscard]] Index dims() const { return demos_.front().dims(); }
  [[nodiscard]] const Trajectory& operator[](std::size_t j) const { return demos_[j]; }
  [[nodiscard]] const std::vector<Trajectory>& demos() const noexcept { return demos_; }
  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }

  [[nodiscard]] bool aligned() const {
    for (const auto& d : demos_) {
      if (d.length() != demos_.front().length()) return false;
    }
    return true;
  }

  /// Common horizon; throws when the set is ragged.
  [[nodiscard]] Index horizon() const {
    if (!aligned()) throw config_error("trajectory", "demonstrations are not time-aligned");
    return demos_.front().length();
  }

 private:
  std::vector<Trajectory> demos_;
  std::vector<std::string> labels_;
};

/// Linear interpolation onto `target` uniformly spaced indices. First and last rows are kept exactly.
inline Eigen::MatrixXd resample(const Eigen::MatrixXd& samples, Index target) {
  if (target < 2 || samples.rows() < 2) throw config_error("trajectory", "resampling needs at least two samples");
  const Index len = samples.rows();
  Eigen::MatrixXd out(target, samples.cols());
  const double span = static_cast<double>(len - 1);
  const double steps = static_cast<double>(target - 1);
  for (Index k = 0; k < target; ++k) {
    const double s = static_cast<double>(k) * span / steps;
    auto i0 = static_cast<Index>(std::floor(s));
    if (i0 >= len - 1) {
      out.row(k) = samples.row(len - 1);
      continue;
    }
    const double frac = s - static_cast<double>(i0);
    if (frac == 0.0) {
      out.row(k) = samples.row(i0);
    } else {
      out.row(k) = (1.0 - frac) * samples.row(i0) + frac * samples.row(i0 + 1);
    }
  }
  return out;
}

/// Warps `demo` onto the time axis of `reference`: each reference index receives the
/// mean of the demo samples matched to it on the optimal DTW path.
inline Eigen::MatrixXd warp_onto(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& demo) {
  const auto al = dtw::align(reference, demo, /*keep_path=*/true);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(reference.rows(), reference.cols());
  Eigen::VectorXd count = Eigen::VectorXd::Zero(reference.rows());
  for (const auto& st : al.path) {
    sum.row(st.i) += demo.row(st.j);
    count(st.i) += 1.0;
  }
  for (Index i = 0; i < sum.rows(); ++i) sum.row(i) /= count(i);
  return sum;
}

/// Demo with minimal summed DTW cost to all others; lowest index wins ties.
inline std::size_t medoid_index(const DemonstrationSet& raw) {
  const std::size_t n = raw.size();
  std::vector<double> total(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double c = dtw::align(raw[a].samples(), raw[b].samples()).cost;
      total[a] += c;
      total[b] += c;
    }
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (total[j] < total[best]) best = j;
  }
  return best;
}

/// Time-aligns every demonstration to the reference by DTW, then resamples all of
/// them to `target_length` samples (defaults to the reference length).
inline DemonstrationSet dtw_align(const DemonstrationSet& raw, std::size_t reference_index,
                                  std::optional<Index> target_length = std::nullopt) {
  if (reference_index >= raw.size()) {
    throw config_error("trajectory", "reference index " + std::to_string(reference_index) + " out of range");
  }
  const auto& ref = raw[reference_index];
  const Index target = target_length.value_or(ref.length());
  if (target < Trajectory::kMinLength) throw config_error("trajectory", "target horizon must be at least 3");

  std::vector<Trajectory> out;
  out.reserve(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const auto& demo = raw[j];
    Eigen::MatrixXd warped = (j == reference_index || raw.size() == 1)
                                 ? demo.samples()
                                 : warp_onto(ref.samples(), demo.samples());
    out.emplace_back(resample(warped, target), ref.dt() * static_cast<double>(ref.length() - 1) /
                                                   static_cast<double>(target - 1));
  }
  return {std::move(out), raw.labels()};
}

/// Aligns to the medoid demonstration.
inline DemonstrationSet dtw_align_to_medoid(const DemonstrationSet& raw,
                                            std::optional<Index> target_length = std::nullopt) {
  return dtw_align(raw, medoid_index(raw), target_length);
}

}  // namespace mccb
