#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mccb/mccb.hpp"
#include "oracles.hpp"

using namespace mccb;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

WeightTriple random_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WeightTriple w{u(rng), u(rng), u(rng)};
  // sometimes drop coordinates entirely
  const int mode = std::uniform_int_distribution<int>(0, 5)(rng);
  if (mode == 1) w.cartesian = 0.0;
  if (mode == 2) w.cartesian = w.tangent = 0.0;
  if (mode == 3) w.cartesian = w.laplacian = 0.0;
  return w;
}

ConstraintSet random_pins(std::mt19937_64& rng, Index T, Index n, int count) {
  std::vector<Index> times(static_cast<std::size_t>(T));
  std::iota(times.begin(), times.end(), Index{0});
  std::shuffle(times.begin(), times.end(), rng);
  ConstraintSet cs(T, n);
  for (int k = 0; k < count; ++k) cs.pin(times[static_cast<std::size_t>(k)], oracle::random_matrix(rng, 1, n, 3.0));
  return cs;
}

double bound(const ConstraintSet& cs) { return 1e-9 * std::max(1.0, cs.targets().cwiseAbs().maxCoeff()); }

}  // namespace

TEST(Reproduce, BandSolveMatchesDenseKktOracle) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const Index T = std::uniform_int_distribution<Index>(3, 20)(rng);
    const Index n = std::uniform_int_distribution<Index>(1, 3)(rng);
    const int m = std::uniform_int_distribution<int>(2, static_cast<int>(std::min<Index>(4, T - 1)))(rng);
    const auto profiles = oracle::random_profiles(rng, T, n);
    const auto w = random_weights(rng);
    const auto cs = random_pins(rng, T, n, m);
    const Reproducer rep(profiles);
    const auto r = rep.solve(w, cs);
    const MatrixXd expect = oracle::dense_kkt_solve(profiles, w, cs.selection(), cs.targets());
    EXPECT_LE(oracle::rel_diff(r.trajectory.samples(), expect), 1e-8) << "trial " << trial;
    EXPECT_LE(r.constraint_residual, bound(cs));
    EXPECT_LE(r.kkt_residual, 1e-10);
  }
}

TEST(Reproduce, GeneralSelectorsUseDenseKkt) {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 50; ++trial) {
    const Index T = std::uniform_int_distribution<Index>(4, 15)(rng);
    const Index n = std::uniform_int_distribution<Index>(1, 3)(rng);
    const auto profiles = oracle::random_profiles(rng, T, n);
    const auto w = random_weights(rng);
    ConstraintSet cs(T, n);
    cs.pin(0, oracle::random_matrix(rng, 1, n));
    // an averaged via constraint: mean of two samples
    Eigen::RowVectorXd sel = Eigen::RowVectorXd::Zero(T);
    sel(1) = 0.5;
    sel(T - 2) = 0.5;
    cs.add(sel, oracle::random_matrix(rng, 1, n));
    ASSERT_FALSE(cs.pinned_indices().has_value());
    const auto r = Reproducer(profiles).solve(w, cs);
    const MatrixXd expect = oracle::dense_kkt_solve(profiles, w, cs.selection(), cs.targets());
    EXPECT_LE(oracle::rel_diff(r.trajectory.samples(), expect), 1e-8);
    EXPECT_LE(r.constraint_residual, bound(cs));
  }
}

TEST(Reproduce, SolverKindsAgree) {
  std::mt19937_64 rng(103);
  const auto profiles = oracle::random_profiles(rng, 30, 2);
  const auto cs = random_pins(rng, 30, 2, 3);
  const Reproducer rep(profiles);
  const WeightTriple w{0.2, 1.0, 0.7};
  const auto a = rep.solve(w, cs, SolverKind::banded);
  const auto b = rep.solve(w, cs, SolverKind::dense_kkt);
  EXPECT_LE(oracle::rel_diff(a.trajectory.samples(), b.trajectory.samples()), 1e-9);
  ConstraintSet general(30, 2);
  general.add(Eigen::RowVectorXd::Constant(30, 1.0 / 30.0), Eigen::RowVector2d(1.0, 2.0));
  EXPECT_THROW((void)rep.solve(w, general, SolverKind::banded), Error);
}

TEST(Reproduce, LongHorizonStaysAccurate) {
  std::mt19937_64 rng(104);
  const Index T = 400;
  const auto profiles = oracle::random_profiles(rng, T, 2);
  const Reproducer rep(profiles);
  ConstraintSet cs(T, 2);
  cs.pin(0, Eigen::RowVector2d(0.0, 0.0)).pin(T - 1, Eigen::RowVector2d(5.0, -2.0)).pin(T / 2, Eigen::RowVector2d(1, 1));
  for (const WeightTriple& w : {WeightTriple{1, 0, 0}, WeightTriple{0, 1, 0}, WeightTriple{0, 0, 1}, WeightTriple{1, 1, 1}}) {
    const auto r = rep.solve(w, cs);
    EXPECT_LE(r.constraint_residual, bound(cs));
    EXPECT_LE(r.kkt_residual, 1e-10);
  }
}

TEST(Reproduce, CostsMatchDenseQuadraticForms) {
  std::mt19937_64 rng(105);
  const Index T = 9, n = 2;
  const auto profiles = oracle::random_profiles(rng, T, n);
  const Reproducer rep(profiles);
  const MatrixXd x = oracle::random_matrix(rng, T, n);
  for (const auto& p : profiles) {
    const MatrixXd r = oracle::dense_operator(p.coordinate, T) * x - p.means;
    double expect = 0.0;
    for (Index t = 0; t < T; ++t) {
      expect += r.row(t) * p.blocks[static_cast<std::size_t>(t)].inverse() * r.row(t).transpose();
    }
    EXPECT_NEAR(rep.cost(p.coordinate, x), expect, 1e-10 * std::max(1.0, expect));
  }
  EXPECT_NEAR(rep.cost(Coordinate::cartesian, profiles[0].means), 0.0, 1e-12);
}

TEST(Reproduce, HessianMatchesDenseAssembly) {
  std::mt19937_64 rng(106);
  const Index T = 7, n = 2;
  const auto profiles = oracle::random_profiles(rng, T, n);
  const WeightTriple w{0.3, 0.9, 0.5};
  MatrixXd expect = MatrixXd::Zero(T * n, T * n);
  for (const auto& p : profiles) {
    const MatrixXd d = Eigen::kroneckerProduct(oracle::dense_operator(p.coordinate, T), MatrixXd::Identity(n, n)).eval();
    MatrixXd prec = MatrixXd::Zero(T * n, T * n);
    for (Index t = 0; t < T; ++t) prec.block(t * n, t * n, n, n) = p.blocks[static_cast<std::size_t>(t)].inverse();
    expect += w[p.coordinate] * d.transpose() * prec * d;
  }
  const MatrixXd got = Reproducer(profiles).hessian(w).dense();
  EXPECT_LE((got - expect).cwiseAbs().maxCoeff(), 1e-10 * expect.cwiseAbs().maxCoeff());
}

TEST(Reproduce, TranslationEquivarianceForDifferentialWeights) {
  std::mt19937_64 rng(107);
  const Index T = 40, n = 2;
  const auto profiles = oracle::random_profiles(rng, T, n);
  const Reproducer rep(profiles);
  ConstraintSet cs(T, n);
  cs.pin(0, Eigen::RowVector2d(0.0, 1.0)).pin(T - 1, Eigen::RowVector2d(4.0, -1.0));
  const Eigen::RowVector2d shift(12.5, -7.25);
  ConstraintSet moved(T, n);
  moved.pin(0, Eigen::RowVector2d(0.0, 1.0) + shift).pin(T - 1, Eigen::RowVector2d(4.0, -1.0) + shift);
  for (const WeightTriple& w : {WeightTriple{0, 1, 0}, WeightTriple{0, 0, 1}, WeightTriple{0, 0.4, 0.6}}) {
    const MatrixXd a = rep.solve(w, cs).trajectory.samples();
    const MatrixXd b = rep.solve(w, moved).trajectory.samples();
    EXPECT_LE(((b.rowwise() - shift) - a).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Reproduce, ViaPointIsHit) {
  std::mt19937_64 rng(108);
  const Index T = 60;
  const auto profiles = oracle::random_profiles(rng, T, 3);
  ConstraintSet cs(T, 3);
  cs.pin(0, Eigen::RowVector3d(0, 0, 0)).pin(T - 1, Eigen::RowVector3d(1, 2, 3)).pin(T / 2, Eigen::RowVector3d(9, 9, 9));
  const auto r = Reproducer(profiles).solve(WeightTriple{0.5, 0.5, 0.5}, cs);
  EXPECT_LE((r.trajectory.samples().row(T / 2) - Eigen::RowVector3d(9, 9, 9)).cwiseAbs().maxCoeff(), 1e-9 * 9.0);
}

TEST(Reproduce, InfeasibleConstraintSetsAreReported) {
  std::mt19937_64 rng(109);
  const Index T = 5;
  const Reproducer rep(oracle::random_profiles(rng, T, 1));
  auto kind_of = [&](const ConstraintSet& cs) {
    try {
      (void)rep.solve(WeightTriple{1, 1, 1}, cs);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::config;
  };
  EXPECT_EQ(kind_of(ConstraintSet(T, 1)), ErrorKind::infeasible);
  ConstraintSet too_many(T, 1);
  for (Index t = 0; t < T; ++t) too_many.pin(t, Eigen::RowVectorXd::Zero(1));
  EXPECT_EQ(kind_of(too_many), ErrorKind::infeasible);
  ConstraintSet dup(T, 1);
  dup.pin(1, Eigen::RowVectorXd::Zero(1)).pin(1, Eigen::RowVectorXd::Ones(1));
  EXPECT_EQ(kind_of(dup), ErrorKind::infeasible);
  EXPECT_THROW(ConstraintSet(T, 1).pin(T, Eigen::RowVectorXd::Zero(1)), Error);
  EXPECT_THROW((void)rep.solve(WeightTriple{0, 0, 0}, ConstraintSet::endpoints(Trajectory(MatrixXd::Zero(T, 1)))),
               Error);
}

TEST(Reproduce, TimeMajorRoundTrip) {
  std::mt19937_64 rng(110);
  const MatrixXd x = oracle::random_matrix(rng, 6, 3);
  const VectorXd v = time_major(x);
  EXPECT_EQ(v(4), x(1, 1));
  EXPECT_EQ(from_time_major(v, 3), x);
}

TEST(Reproduce, TrainedModelReproducesTrainingDemoClosely) {
  const auto demos = synthetic::generate(synthetic::Family::translated, {7, 120, 3, 0.005});
  const auto model = train(demos);
  const Reproducer rep(model);
  const auto r = rep.solve(WeightTriple{0.0, 1.0, 0.0}, ConstraintSet::endpoints(demos[2]));
  EXPECT_LE((r.trajectory.samples() - demos[2].samples()).rowwise().norm().maxCoeff(), 0.05 * demos[2].diameter());
}
