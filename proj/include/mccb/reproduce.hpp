#pragma once

// Constrained reproduction: minimize w_C J_C + w_G J_G + w_L J_L subject to P X = X*.
//
// Each cost is (vec(D X) - vec(M))^T blockdiag(S_t)^{-1} (vec(D X) - vec(M)) with D the
// coordinate's operator, M the GMR means and S_t the per-time conditional covariances.
// Vectorization is time-major, so variable v = t * n + i. The Hessian couples time
// steps at most two apart (D is tridiagonal), giving a scalar half-bandwidth of 3n - 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "mccb/banded.hpp"
#include "mccb/diffops.hpp"
#include "mccb/error.hpp"
#include "mccb/multicoord.hpp"
#include "mccb/trajectory.hpp"

namespace mccb {

/// Row-major (time-major) flattening of a T x n sample matrix.
inline Eigen::VectorXd time_major(const Eigen::MatrixXd& x) {
  Eigen::VectorXd v(x.size());
  for (Index t = 0; t < x.rows(); ++t) v.segment(t * x.cols(), x.cols()) = x.row(t).transpose();
  return v;
}

inline Eigen::MatrixXd from_time_major(const Eigen::VectorXd& v, Index dims) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(v.data(), v.size() / dims, dims);
}

/// Linear equality constraints on the reproduction, one (selector, target) pair per row.
class ConstraintSet {
 public:
  struct Row {
    Eigen::RowVectorXd selector;  // length T
    Eigen::RowVectorXd target;    // length n
  };

  ConstraintSet(Index horizon, Index dims) : horizon_(horizon), dims_(dims) {}

  /// Initial and final sample of `demo`.
  static ConstraintSet endpoints(const Trajectory& demo) {
    ConstraintSet c(demo.length(), demo.dims());
    c.pin(0, demo.front());
    c.pin(demo.length() - 1, demo.back());
    return c;
  }

  /// Forces the sample at time index t to `value`.
  ConstraintSet& pin(Index t, const Eigen::RowVectorXd& value) {
    if (t < 0 || t >= horizon_) {
      throw config_error("reproduce", "constraint time index " + std::to_string(t) + " outside horizon");
    }
    Eigen::RowVectorXd sel = Eigen::RowVectorXd::Zero(horizon_);
    sel(t) = 1.0;
    return add(std::move(sel), value);
  }

  ConstraintSet& add(Eigen::RowVectorXd selector, Eigen::RowVectorXd target) {
    if (selector.size() != horizon_ || target.size() != dims_) {
      throw config_error("reproduce", "constraint row has wrong shape");
    }
    if (!selector.allFinite() || !target.allFinite()) throw config_error("reproduce", "non-finite constraint");
    rows_.push_back({std::move(selector), std::move(target)});
    return *this;
  }

  [[nodiscard]] Index horizon() const noexcept { return horizon_; }
  [[nodiscard]] Index dims() const noexcept { return dims_; }
  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
  [[nodiscard]] const std::vector<Row>& rows() const noexcept { return rows_; }

  [[nodiscard]] Eigen::MatrixXd selection() const {
    Eigen::MatrixXd p(static_cast<Index>(rows_.size()), horizon_);
    for (std::size_t r = 0; r < rows_.size(); ++r) p.row(static_cast<Index>(r)) = rows_[r].selector;
    return p;
  }

  [[nodiscard]] Eigen::MatrixXd targets() const {
    Eigen::MatrixXd x(static_cast<Index>(rows_.size()), dims_);
    for (std::size_t r = 0; r < rows_.size(); ++r) x.row(static_cast<Index>(r)) = rows_[r].target;
    return x;
  }

  /// Time index of each row when every selector is a distinct one-hot row.
  [[nodiscard]] std::optional<std::vector<Index>> pinned_indices() const {
    std::vector<Index> idx;
    for (const auto& r : rows_) {
      Index hot = -1;
      for (Index t = 0; t < horizon_; ++t) {
        if (r.selector(t) == 0.0) continue;
        if (r.selector(t) != 1.0 || hot >= 0) return std::nullopt;
        hot = t;
      }
      if (hot < 0) return std::nullopt;
      idx.push_back(hot);
    }
    auto sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return std::nullopt;
    return idx;
  }

  /// Throws unless 1 <= m < T and the selector rows are linearly independent.
  void validate() const {
    const auto m = static_cast<Index>(rows_.size());
    if (m < 1) throw infeasible_error("reproduce", "at least one constraint is required");
    if (m >= horizon_) throw infeasible_error("reproduce", "more constraints than free time steps");
    if (pinned_indices()) return;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(selection());
    if (lu.rank() < m) throw infeasible_error("reproduce", "constraint selectors are linearly dependent");
  }

  /// max |P X - X*|
  [[nodiscard]] double residual(const Eigen::MatrixXd& x) const {
    if (rows_.empty()) return 0.0;
    return (selection() * x - targets()).cwiseAbs().maxCoeff();
  }

 private:
  Index horizon_;
  Index dims_;
  std::vector<Row> rows_;
};

struct WeightTriple {
  double cartesian = 0.0;
  double tangent = 0.0;
  double laplacian = 0.0;

  [[nodiscard]] double operator[](Coordinate c) const {
    switch (c) {
      case Coordinate::cartesian:
        return cartesian;
      case Coordinate::tangent:
        return tangent;
      case Coordinate::laplacian:
        return laplacian;
    }
    return 0.0;
  }

  void validate() const {
    for (double w : {cartesian, tangent, laplacian}) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw config_error("reproduce", "weights must be finite and non-negative");
    }
    if (!(cartesian > 0.0 || tangent > 0.0 || laplacian > 0.0)) {
      throw config_error("reproduce", "at least one weight must be positive");
    }
  }

  /// Same direction, largest entry exactly 1. The minimizer only depends on the ratios.
  [[nodiscard]] WeightTriple normalized() const {
    const double top = std::max({cartesian, tangent, laplacian});
    return {cartesian / top, tangent / top, laplacian / top};
  }
};

struct CostBreakdown {
  double cartesian = 0.0;
  double tangent = 0.0;
  double laplacian = 0.0;

  [[nodiscard]] double operator[](Coordinate c) const {
    return c == Coordinate::cartesian ? cartesian : c == Coordinate::tangent ? tangent : laplacian;
  }
};

struct Reproduction {
  Trajectory trajectory;
  CostBreakdown costs;
  double kkt_residual = 0.0;         // relative: |KKT residual|_inf / system scale
  double constraint_residual = 0.0;  // max |P X_r - X*|
};

enum class SolverKind {
  automatic,  // band elimination when every constraint pins a time index, dense KKT otherwise
  banded,
  dense_kkt,
};

/// Quadratic form of one coordinate: sum_t (D X - M)_t^T S_t^{-1} (D X - M)_t.
inline double coordinate_cost(const Eigen::MatrixXd& x, const ConditionalProfile& prof, const DiffOperator& op) {
  if (x.rows() != prof.horizon() || x.cols() != prof.dims() || op.horizon() != prof.horizon()) {
    throw config_error("reproduce", "trajectory, profile and operator shapes disagree");
  }
  const Eigen::MatrixXd r = op.apply(x) - prof.means;
  double total = 0.0;
  for (Index t = 0; t < r.rows(); ++t) {
    Eigen::LLT<Eigen::MatrixXd> llt(prof.blocks[static_cast<std::size_t>(t)]);
    if (llt.info() != Eigen::Success) {
      throw numerical_error("reproduce", "singular covariance block at t=" + std::to_string(t));
    }
    const Eigen::VectorXd rt = r.row(t).transpose();
    total += rt.dot(llt.solve(rt));
  }
  return total;
}

/// Precomputed per-coordinate quadratic forms for repeated solves against one model.
class Reproducer {
 public:
  explicit Reproducer(const MultiCoordModel& model) : Reproducer(profiles(model)) {}

  explicit Reproducer(ProfileSet profiles) : profiles_(std::move(profiles)) {
    horizon_ = profiles_[0].horizon();
    dims_ = profiles_[0].dims();
    for (const auto& p : profiles_) {
      if (p.horizon() != horizon_ || p.dims() != dims_ || static_cast<Index>(p.blocks.size()) != horizon_) {
        throw config_error("reproduce", "profiles disagree on horizon or dimension");
      }
    }
    for (auto c : kCoordinates) assemble(c);
  }

  [[nodiscard]] Index horizon() const noexcept { return horizon_; }
  [[nodiscard]] Index dims() const noexcept { return dims_; }
  [[nodiscard]] const ConditionalProfile& profile(Coordinate c) const { return profiles_[slot(c)]; }

  [[nodiscard]] double cost(Coordinate c, const Eigen::MatrixXd& x) const {
    const auto& q = forms_[slot(c)];
    const Eigen::MatrixXd r = DiffOperator(operator_kind(c), horizon_).apply(x) - profiles_[slot(c)].means;
    double total = 0.0;
    for (Index t = 0; t < horizon_; ++t) {
      const Eigen::VectorXd rt = r.row(t).transpose();
      total += rt.dot(q.factors[static_cast<std::size_t>(t)].solve(rt));
    }
    return total;
  }

  [[nodiscard]] CostBreakdown costs(const Eigen::MatrixXd& x) const {
    return {cost(Coordinate::cartesian, x), cost(Coordinate::tangent, x), cost(Coordinate::laplacian, x)};
  }

  /// Blended Hessian H = sum_c w_c D_c^T S_c^{-1} D_c in band storage (unnormalized weights).
  [[nodiscard]] SymmetricBand hessian(const WeightTriple& w) const {
    const Index n = dims_;
    SymmetricBand h(horizon_ * n, 3 * n - 1);
    for (auto c : kCoordinates) {
      const double wc = w[c];
      if (wc == 0.0) continue;
      const auto& q = forms_[slot(c)];
      for (Index s = 0; s < horizon_; ++s) {
        for (Index off = 0; off <= 2 && s + off < horizon_; ++off) {
          const Eigen::MatrixXd& blk = q.blocks[static_cast<std::size_t>(off)][static_cast<std::size_t>(s)];
          // block (s + off, s) of the lower triangle equals blk^T
          for (Index a = 0; a < n; ++a) {
            for (Index b = 0; b < n; ++b) {
              const Index row = (s + off) * n + a;
              const Index col = s * n + b;
              if (row >= col) h.lower(row, col) += wc * blk(b, a);
            }
          }
        }
      }
    }
    return h;
  }

  /// Blended linear term g = sum_c w_c D_c^T S_c^{-1} vec(M_c).
  [[nodiscard]] Eigen::VectorXd gradient_offset(const WeightTriple& w) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(horizon_ * dims_);
    for (auto c : kCoordinates) {
      if (w[c] != 0.0) g += w[c] * forms_[slot(c)].linear;
    }
    return g;
  }

  [[nodiscard]] Reproduction solve(const WeightTriple& weights, const ConstraintSet& constraints,
                                   SolverKind kind = SolverKind::automatic) const {
    auto out = solve_many(weights, {constraints}, kind, /*with_costs=*/true);
    return std::move(out.front());
  }

  /// Solves one problem per constraint set; sets sharing a pinned-index pattern share a factorization.
  [[nodiscard]] std::vector<Reproduction> solve_many(const WeightTriple& weights,
                                                     const std::vector<ConstraintSet>& sets,
                                                     SolverKind kind = SolverKind::automatic,
                                                     bool with_costs = true) const {
    weights.validate();
    const WeightTriple w = weights.normalized();
    const SymmetricBand h = hessian(w);
    const Eigen::VectorXd g = gradient_offset(w);

    std::map<std::vector<Index>, std::optional<BandCholesky>> cache;
    std::vector<Reproduction> out;
    out.reserve(sets.size());
    for (const auto& cs : sets) {
      if (cs.horizon() != horizon_ || cs.dims() != dims_) {
        throw config_error("reproduce", "constraint set does not match model horizon/dimension");
      }
      cs.validate();
      const auto pins = cs.pinned_indices();
      const bool banded = kind == SolverKind::banded || (kind == SolverKind::automatic && pins.has_value());
      if (banded && !pins) throw config_error("reproduce", "band solver needs one-hot constraints");
      Reproduction r = banded ? solve_pinned(h, g, w, cs, *pins, cache) : solve_dense(h, g, cs);
      if (with_costs) r.costs = costs(r.trajectory.samples());
      out.push_back(std::move(r));
    }
    return out;
  }

 private:
  struct QuadraticForm {
    std::vector<Eigen::LLT<Eigen::MatrixXd>> factors;         // per-time covariance factors
    std::array<std::vector<Eigen::MatrixXd>, 3> blocks;       // blocks[off][s] = H(s, s + off)
    Eigen::VectorXd linear;                                   // D^T S^{-1} vec(M)
  };

  void assemble(Coordinate c) {
    const auto& prof = profiles_[slot(c)];
    const DiffOperator op(operator_kind(c), horizon_);
    const Index n = dims_;
    const Index T = horizon_;
    auto& q = forms_[slot(c)];
    q.factors.reserve(static_cast<std::size_t>(T));
    std::vector<Eigen::MatrixXd> inv(static_cast<std::size_t>(T));
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    for (Index t = 0; t < T; ++t) {
      Eigen::LLT<Eigen::MatrixXd> llt(prof.blocks[static_cast<std::size_t>(t)]);
      if (llt.info() != Eigen::Success) {
        throw numerical_error("reproduce", std::string(to_string(c)) + " covariance block at t=" +
                                               std::to_string(t) + " is not positive definite");
      }
      Eigen::MatrixXd wi = llt.solve(eye);
      inv[static_cast<std::size_t>(t)] = 0.5 * (wi + wi.transpose());
      q.factors.push_back(std::move(llt));
    }
    for (auto& b : q.blocks) b.assign(static_cast<std::size_t>(T), Eigen::MatrixXd::Zero(n, n));
    q.linear = Eigen::VectorXd::Zero(T * n);
    // H(s, u) = sum_t D(t, s) D(t, u) W_t ; row t of D touches columns t-1, t, t+1
    for (Index t = 0; t < T; ++t) {
      const auto& wt = inv[static_cast<std::size_t>(t)];
      const Index lo = std::max<Index>(0, t - 1);
      const Index hi = std::min<Index>(T - 1, t + 1);
      const Eigen::VectorXd wm = wt * prof.means.row(t).transpose();
      for (Index s = lo; s <= hi; ++s) {
        const double ds = op(t, s);
        if (ds == 0.0) continue;
        q.linear.segment(s * n, n) += ds * wm;
        for (Index u = s; u <= hi; ++u) {
          const double du = op(t, u);
          if (du == 0.0) continue;
          q.blocks[static_cast<std::size_t>(u - s)][static_cast<std::size_t>(s)] += (ds * du) * wt;
        }
      }
    }
  }

  static double system_scale(double h_norm, const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) {
    return std::max(h_norm * x.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff(),
                    std::numeric_limits<double>::min());
  }

  // H (1 (x) c), built from the exact products D 1 instead of by cancellation in H.
  [[nodiscard]] Eigen::VectorXd shifted_offset(const WeightTriple& w, const Eigen::VectorXd& c) const {
    const Index n = dims_;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(horizon_ * n);
    for (auto coord : kCoordinates) {
      if (w[coord] == 0.0) continue;
      const DiffOperator op(operator_kind(coord), horizon_);
      const Eigen::VectorXd d1 = op.apply(Eigen::MatrixXd::Ones(horizon_, 1));
      const auto& q = forms_[slot(coord)];
      for (Index t = 0; t < horizon_; ++t) {
        if (d1(t) == 0.0) continue;
        const Eigen::VectorXd u = (w[coord] * d1(t)) * q.factors[static_cast<std::size_t>(t)].solve(c);
        // apply D^T: row t of D touches columns t-1, t, t+1
        for (Index s = std::max<Index>(0, t - 1); s <= std::min<Index>(horizon_ - 1, t + 1); ++s) {
          const double ds = op(t, s);
          if (ds != 0.0) out.segment(s * n, n) += ds * u;
        }
      }
    }
    return out;
  }

  Reproduction solve_pinned(const SymmetricBand& h, const Eigen::VectorXd& g_raw, const WeightTriple& w,
                            const ConstraintSet& cs,
                            const std::vector<Index>& pins,
                            std::map<std::vector<Index>, std::optional<BandCholesky>>& cache) const {
    const Index n = dims_;
    const Index T = horizon_;
    std::vector<Index> pattern = pins;
    std::sort(pattern.begin(), pattern.end());

    std::vector<Index> free_times;
    for (Index t = 0, k = 0; t < T; ++t) {
      if (k < static_cast<Index>(pattern.size()) && pattern[static_cast<std::size_t>(k)] == t) {
        ++k;
      } else {
        free_times.push_back(t);
      }
    }
    const auto nf = static_cast<Index>(free_times.size());

    auto it = cache.find(pattern);
    if (it == cache.end()) {
      SymmetricBand reduced(nf * n, 3 * n - 1);
      for (Index a = 0; a < nf; ++a) {
        for (Index b = std::max<Index>(0, a - 2); b <= a; ++b) {
          const Index ta = free_times[static_cast<std::size_t>(a)];
          const Index tb = free_times[static_cast<std::size_t>(b)];
          if (ta - tb > 2) continue;
          for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
              if (a * n + i >= b * n + j) reduced.lower(a * n + i, b * n + j) = h(ta * n + i, tb * n + j);
            }
          }
        }
      }
      it = cache.emplace(pattern, BandCholesky::factor(reduced)).first;
    }
    if (!it->second) {
      throw infeasible_error("reproduce",
                             "underdetermined reproduction: add constraints or Cartesian weight");
    }

    // Solve for X - 1 c^T with c the first pinned target. A common shift of the
    // targets then never enters the ill-conditioned smooth modes of H, so
    // differential-only solutions move with the constraints to rounding level.
    const Eigen::VectorXd c = cs.rows().front().target.transpose();
    const Eigen::VectorXd g = g_raw - shifted_offset(w, c);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(T * n);
    for (std::size_t r = 0; r < pins.size(); ++r) {
      x.segment(pins[r] * n, n) = cs.rows()[r].target.transpose() - c;
    }
    // reduced right-hand side g_F - H_FC x_C
    const Eigen::VectorXd hx_fixed = h.multiply(x);
    Eigen::VectorXd rhs(nf * n);
    for (Index a = 0; a < nf; ++a) {
      const Index t = free_times[static_cast<std::size_t>(a)];
      rhs.segment(a * n, n) = g.segment(t * n, n) - hx_fixed.segment(t * n, n);
    }
    const Eigen::VectorXd xf = it->second->solve(rhs);
    for (Index a = 0; a < nf; ++a) x.segment(free_times[static_cast<std::size_t>(a)] * n, n) = xf.segment(a * n, n);

    const Eigen::VectorXd stat = h.multiply(x) - g;
    double res = 0.0;
    for (Index a = 0; a < nf; ++a) {
      res = std::max(res, stat.segment(free_times[static_cast<std::size_t>(a)] * n, n).cwiseAbs().maxCoeff());
    }
    Reproduction out;
    Eigen::MatrixXd samples = from_time_major(x, n).rowwise() + c.transpose();
    for (std::size_t r = 0; r < pins.size(); ++r) samples.row(pins[r]) = cs.rows()[r].target;
    out.trajectory = Trajectory(samples);
    out.kkt_residual = res / system_scale(h.inf_norm(), x, g);
    out.constraint_residual = cs.residual(samples);
    return out;
  }

  Reproduction solve_dense(const SymmetricBand& h, const Eigen::VectorXd& g, const ConstraintSet& cs) const {
    const Index n = dims_;
    const Index nv = horizon_ * n;
    const auto m = static_cast<Index>(cs.size());
    const Eigen::MatrixXd p = cs.selection();
    const Eigen::MatrixXd xs = cs.targets();

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + m * n, nv + m * n);
    kkt.topLeftCorner(nv, nv) = h.dense();
    Eigen::VectorXd rhs(nv + m * n);
    rhs.head(nv) = g;
    for (Index r = 0; r < m; ++r) {
      for (Index i = 0; i < n; ++i) {
        const Index row = nv + r * n + i;
        for (Index t = 0; t < horizon_; ++t) {
          kkt(row, t * n + i) = p(r, t);
          kkt(t * n + i, row) = p(r, t);
        }
        rhs(row) = xs(r, i);
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) {
      throw infeasible_error("reproduce", "underdetermined reproduction: add constraints or Cartesian weight");
    }
    const Eigen::VectorXd z = lu.solve(rhs);
    Reproduction out;
    const Eigen::VectorXd x = z.head(nv);
    const Eigen::MatrixXd samples = from_time_major(x, n);
    out.trajectory = Trajectory(samples);
    const double knorm = kkt.cwiseAbs().rowwise().sum().maxCoeff();
    out.kkt_residual = (kkt * z - rhs).cwiseAbs().maxCoeff() / system_scale(knorm, z, rhs);
    out.constraint_residual = cs.residual(samples);
    return out;
  }

  ProfileSet profiles_;
  std::array<QuadraticForm, 3> forms_;
  Index horizon_ = 0;
  Index dims_ = 0;
};

inline Reproduction solve_reproduction(const MultiCoordModel& model, const WeightTriple& weights,
                                       const ConstraintSet& constraints, SolverKind kind = SolverKind::automatic) {
  return Reproducer(model).solve(weights, constraints, kind);
}

}  // namespace mccb
