#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mccb/mccb.hpp"
#include "oracles.hpp"

using namespace mccb;
using Eigen::MatrixXd;

namespace {

// Smooth planar curve sampled at s in [0,1] through a monotone time warp.
MatrixXd warped_curve(Index len, double warp, const Eigen::Vector2d& shift = Eigen::Vector2d::Zero()) {
  MatrixXd x(len, 2);
  for (Index t = 0; t < len; ++t) {
    const double u = static_cast<double>(t) / static_cast<double>(len - 1);
    const double s = u + warp * std::sin(std::numbers::pi * u) / std::numbers::pi;
    x(t, 0) = 3.0 * s + shift.x();
    x(t, 1) = std::sin(2.0 * std::numbers::pi * s) + shift.y();
  }
  return x;
}

double dtw_cost(const MatrixXd& a, const MatrixXd& b) { return dtw::align(a, b).cost; }

}  // namespace

TEST(Trajectory, RejectsInvalidSamples) {
  EXPECT_THROW(Trajectory(MatrixXd::Zero(2, 2)), Error);
  EXPECT_THROW(Trajectory(MatrixXd::Zero(5, 0)), Error);
  MatrixXd nan = MatrixXd::Zero(4, 2);
  nan(2, 1) = std::nan("");
  try {
    Trajectory bad(nan);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
  }
  EXPECT_THROW(Trajectory(MatrixXd::Zero(4, 2), 0.0), Error);
}

TEST(Trajectory, AccessorsAndDiameter) {
  MatrixXd x(3, 2);
  x << 0, 0, 3, 4, 1, 1;
  const Trajectory tr(x, 0.5);
  EXPECT_EQ(tr.length(), 3);
  EXPECT_EQ(tr.dims(), 2);
  EXPECT_DOUBLE_EQ(tr.dt(), 0.5);
  EXPECT_DOUBLE_EQ(tr.diameter(), 5.0);
  EXPECT_EQ(tr.back()(1), 1.0);
}

TEST(DemonstrationSet, LabelsDimsAndHorizon) {
  const DemonstrationSet set({Trajectory(MatrixXd::Zero(4, 2)), Trajectory(MatrixXd::Ones(5, 2))});
  EXPECT_EQ(set.labels()[1], "demo1");
  EXPECT_EQ(set.dims(), 2);
  EXPECT_FALSE(set.aligned());
  EXPECT_THROW((void)set.horizon(), Error);
  EXPECT_THROW(DemonstrationSet({Trajectory(MatrixXd::Zero(4, 2)), Trajectory(MatrixXd::Zero(4, 3))}), Error);
}

TEST(Resample, KeepsEndpointsAndInterpolatesLinearly) {
  MatrixXd x(5, 1);
  x << 0, 1, 4, 9, 16;
  const MatrixXd r = resample(x, 9);
  EXPECT_EQ(r(0, 0), 0.0);
  EXPECT_EQ(r(8, 0), 16.0);
  EXPECT_DOUBLE_EQ(r(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(r(3, 0), 2.5);
  EXPECT_EQ(r(4, 0), 4.0);
}

TEST(DtwAlign, IdenticalDemosStayIdentical) {
  const MatrixXd a = warped_curve(100, 0.0);
  const DemonstrationSet set({Trajectory(a), Trajectory(a)});
  const auto out = dtw_align(set, 0, Index{50});
  ASSERT_EQ(out.horizon(), 50);
  EXPECT_EQ(out[0].samples(), out[1].samples());
}

TEST(DtwAlign, DoubleSpeedDemoRecoversReference) {
  const MatrixXd a = warped_curve(61, 0.0);
  MatrixXd b(31, 2);
  for (Index t = 0; t < 31; ++t) b.row(t) = a.row(2 * t);
  const DemonstrationSet set({Trajectory(a), Trajectory(b)});
  const auto out = dtw_align(set, 0, a.rows());
  double spacing = 0.0;
  for (Index t = 0; t + 1 < a.rows(); ++t) spacing = std::max(spacing, (a.row(t + 1) - a.row(t)).norm());
  for (Index t = 0; t < a.rows(); ++t) EXPECT_LE((out[1].samples().row(t) - a.row(t)).norm(), spacing + 1e-12);
}

TEST(DtwAlign, SingleDemoIsOnlyResampled) {
  const MatrixXd a = warped_curve(40, 0.3);
  const auto out = dtw_align(DemonstrationSet({Trajectory(a)}), 0, Index{25});
  EXPECT_EQ(out[0].samples(), resample(a, 25));
}

TEST(DtwAlign, DoesNotIncreaseDistanceToReference) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> warp(-0.6, 0.6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Trajectory> demos;
    for (int j = 0; j < 4; ++j) {
      demos.emplace_back(warped_curve(30 + 5 * j, warp(rng)) + oracle::random_matrix(rng, 30 + 5 * j, 2, 0.02));
    }
    const DemonstrationSet raw(std::move(demos));
    const std::size_t ref = medoid_index(raw);
    const auto out = dtw_align(raw, ref);
    for (std::size_t j = 0; j < raw.size(); ++j) {
      EXPECT_LE(dtw_cost(raw[ref].samples(), out[j].samples()),
                dtw_cost(raw[ref].samples(), raw[j].samples()) + 1e-12);
    }
  }
}

TEST(DtwAlign, IdempotentOnWarpedCurves) {
  std::vector<Trajectory> demos;
  for (double w : {0.0, 0.3, -0.25, 0.5}) demos.emplace_back(warped_curve(80, w));
  const DemonstrationSet raw(std::move(demos));
  const auto once = dtw_align(raw, 0);
  const auto twice = dtw_align(once, 0);
  for (std::size_t j = 0; j < raw.size(); ++j) {
    EXPECT_LE((once[j].samples() - twice[j].samples()).cwiseAbs().maxCoeff(), 1e-12) << "demo " << j;
  }
}

TEST(DtwAlign, MedoidTieBreaksToLowestIndex) {
  const MatrixXd a = warped_curve(20, 0.0);
  const DemonstrationSet set({Trajectory(a), Trajectory(a), Trajectory(a)});
  EXPECT_EQ(medoid_index(set), 0u);
}

TEST(DtwAlign, RejectsBadArguments) {
  const DemonstrationSet set({Trajectory(warped_curve(10, 0.0))});
  EXPECT_THROW(dtw_align(set, 1), Error);
  EXPECT_THROW(dtw_align(set, 0, Index{2}), Error);
}

TEST(DtwAlign, OutputSpacingCoversReferenceDuration) {
  const DemonstrationSet set({Trajectory(warped_curve(21, 0.0), 0.1), Trajectory(warped_curve(30, 0.2), 0.1)});
  const auto out = dtw_align(set, 0, Index{41});
  EXPECT_DOUBLE_EQ(out[1].dt() * 40.0, 0.1 * 20.0);
}
