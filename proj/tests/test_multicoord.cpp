#include <gtest/gtest.h>

#include "mccb/mccb.hpp"

using namespace mccb;
using Eigen::MatrixXd;

TEST(JointData, StacksNormalizedTimeAndTransformedValues) {
  const auto demos = synthetic::generate(synthetic::Family::arcs, {3, 20, 1, 0.0});
  for (auto c : kCoordinates) {
    const MatrixXd data = joint_data(demos, c);
    ASSERT_EQ(data.rows(), 60);
    ASSERT_EQ(data.cols(), 3);
    const MatrixXd expect = DiffOperator(operator_kind(c), 20).apply(demos[1]);
    for (Index t = 0; t < 20; ++t) {
      EXPECT_EQ(data(20 + t, 0), static_cast<double>(t) / 19.0);
      EXPECT_EQ(data.row(20 + t).tail(2), expect.row(t));
    }
  }
}

TEST(Train, FitsThreeMixturesOverTheJointSpace) {
  const auto demos = synthetic::generate(synthetic::Family::translated, {7, 100, 2, 0.005});
  const auto model = train(demos);
  EXPECT_EQ(model.horizon(), 100);
  EXPECT_EQ(model.dims(), 2);
  for (auto c : kCoordinates) {
    EXPECT_EQ(model.mixture(c).size(), 5u);
    EXPECT_EQ(model.mixture(c).value_dims(), 2);
    EXPECT_GT(model.model(c).regularization, 0.0);
  }
}

TEST(Train, RejectsUnalignedDemonstrations) {
  DemonstrationSet ragged({Trajectory(MatrixXd::Random(10, 2)), Trajectory(MatrixXd::Random(12, 2))});
  EXPECT_THROW((void)train(ragged), Error);
}

TEST(Train, SingleStraightLineIsRecoveredByCartesianProfile) {
  const Index T = 80;
  MatrixXd line(T, 2);
  for (Index t = 0; t < T; ++t) line.row(t) << 0.5 * t, 3.0 - 0.25 * t;
  const DemonstrationSet demos({Trajectory(line)});
  const auto model = train(demos, TrainOptions::uniform(4, 0));
  const auto p = profile(model, Coordinate::cartesian);
  // the ridge scales with the position variance and shrinks each local slope a little
  EXPECT_LE((p.means - line).cwiseAbs().maxCoeff(), 2e-3 * Trajectory(line).diameter());
}

TEST(Profiles, RowsEqualPointwiseConditioning) {
  const auto demos = synthetic::generate(synthetic::Family::mixed, {5, 40, 3, 0.005});
  const auto model = train(demos);
  const auto ps = profiles(model);
  for (auto c : kCoordinates) {
    const auto& p = ps[slot(c)];
    EXPECT_EQ(p.coordinate, c);
    for (Index t = 0; t < 40; ++t) {
      const auto cond = condition(model.mixture(c), normalized_time(t, 40));
      EXPECT_EQ(p.means.row(t), cond.mean.transpose());
      EXPECT_EQ(p.blocks[static_cast<std::size_t>(t)], cond.covariance);
    }
  }
}

TEST(Serialize, ModelRoundTripIsExact) {
  const auto demos = synthetic::generate(synthetic::Family::anchored, {4, 30, 4, 0.005});
  const auto model = train(demos, TrainOptions::uniform(3, 7));
  const auto text = serialize::to_json(model).dump();
  const auto back = serialize::model_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.horizon(), model.horizon());
  for (auto c : kCoordinates) {
    const auto& a = model.mixture(c);
    const auto& b = back.mixture(c);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].prior, b[k].prior);
      EXPECT_EQ(a[k].mean, b[k].mean);
      EXPECT_EQ(a[k].covariance, b[k].covariance);
    }
    EXPECT_EQ(back.model(c).seed, 7u);
  }
}
