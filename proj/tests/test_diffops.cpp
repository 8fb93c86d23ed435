#include <random>

#include <gtest/gtest.h>

#include "mccb/mccb.hpp"
#include "oracles.hpp"

using namespace mccb;
using Eigen::MatrixXd;

TEST(DiffOperator, MatchesWrittenOutMatricesEntryForEntry) {
  for (Index T = 3; T <= 10; ++T) {
    EXPECT_EQ(DiffOperator(OperatorKind::laplacian, T).dense(), oracle::dense_laplacian(T)) << "T=" << T;
    EXPECT_EQ(DiffOperator(OperatorKind::tangent, T).dense(), oracle::dense_tangent(T)) << "T=" << T;
    EXPECT_EQ(DiffOperator(OperatorKind::identity, T).dense(), MatrixXd::Identity(T, T));
    const DiffOperator l(OperatorKind::laplacian, T);
    for (Index r = 0; r < T; ++r) {
      for (Index c = 0; c < T; ++c) EXPECT_EQ(l(r, c), oracle::dense_laplacian(T)(r, c));
    }
  }
}

TEST(DiffOperator, BandedApplyEqualsDenseMultiply) {
  std::mt19937_64 rng(3);
  for (Index T = 3; T <= 40; ++T) {
    for (auto kind : {OperatorKind::identity, OperatorKind::tangent, OperatorKind::laplacian}) {
      const DiffOperator op(kind, T);
      const MatrixXd x = oracle::random_matrix(rng, T, 3, 10.0);
      const MatrixXd dense = op.dense() * x;
      EXPECT_LE((op.apply(x) - dense).cwiseAbs().maxCoeff(), 1e-14 * std::max(1.0, dense.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(DiffOperator, LaplacianInteriorRowIsExactNeighbourDeviation) {
  std::mt19937_64 rng(5);
  const MatrixXd x = oracle::random_matrix(rng, 12, 2);
  const MatrixXd d = DiffOperator(OperatorKind::laplacian, 12).apply(x);
  for (Index t = 1; t < 11; ++t) {
    const Eigen::RowVectorXd expect = x.row(t) - 0.5 * (x.row(t - 1) + x.row(t + 1));
    EXPECT_EQ(d.row(t), expect);
  }
}

TEST(DiffOperator, LaplacianKillsConstantsAndStraightLines) {
  MatrixXd line(8, 2);
  for (Index t = 0; t < 8; ++t) line.row(t) << 2.0 + t, -1.0 + 0.5 * t;
  const MatrixXd d = DiffOperator(OperatorKind::laplacian, 8).apply(line);
  EXPECT_EQ(d.middleRows(1, 6), MatrixXd::Zero(6, 2));
  const MatrixXd c = DiffOperator(OperatorKind::laplacian, 8).apply(MatrixXd::Constant(8, 2, 4.0));
  EXPECT_EQ(c, MatrixXd::Zero(8, 2));
}

TEST(DiffOperator, TangentIsInvertibleLaplacianIsNot) {
  for (Index T = 3; T <= 10; ++T) {
    EXPECT_EQ(Eigen::FullPivLU<MatrixXd>(oracle::dense_tangent(T)).rank(), T);
    EXPECT_EQ(Eigen::FullPivLU<MatrixXd>(oracle::dense_laplacian(T)).rank(), T - 1);
  }
}

TEST(DiffOperator, RejectsShortHorizonAndMismatch) {
  EXPECT_THROW(DiffOperator(OperatorKind::tangent, 2), Error);
  EXPECT_THROW((void)DiffOperator(OperatorKind::tangent, 5).apply(MatrixXd::Zero(6, 2)), Error);
}
