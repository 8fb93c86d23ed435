#pragma once

// Differential coordinate operators on a chain graph of T samples.
//
//   laplacian  L: rows (1,-1) | (-0.5, 1, -0.5) ... | (-1, 1)
//   tangent    G: rows (-1, 1) shifted, last row (0, ..., 0, -1)
//   identity   I
//
// All three are tridiagonal and stored as three diagonals.

#include <string>
#include <string_view>

#include <Eigen/Core>

#include "mccb/error.hpp"
#include "mccb/trajectory.hpp"

namespace mccb {

enum class OperatorKind { identity, tangent, laplacian };

inline std::string_view to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::identity:
      return "identity";
    case OperatorKind::tangent:
      return "tangent";
    case OperatorKind::laplacian:
      return "laplacian";
  }
  return "?";
}

class DiffOperator {
 public:
  DiffOperator(OperatorKind kind, Index horizon) : kind_(kind), horizon_(horizon) {
    if (horizon < Trajectory::kMinLength) {
      throw config_error("diffops", "operator horizon must be at least 3, got " + std::to_string(horizon));
    }
    lower_ = Eigen::VectorXd::Zero(horizon);
    diag_ = Eigen::VectorXd::Zero(horizon);
    upper_ = Eigen::VectorXd::Zero(horizon);
    const Index last = horizon - 1;
    switch (kind) {
      case OperatorKind::identity:
        diag_.setOnes();
        break;
      case OperatorKind::tangent:
        diag_.setConstant(-1.0);
        upper_.head(last).setOnes();
        break;
      case OperatorKind::laplacian:
        diag_.setOnes();
        lower_.segment(1, last - 1).setConstant(-0.5);
        upper_.segment(1, last - 1).setConstant(-0.5);
        upper_(0) = -1.0;
        lower_(last) = -1.0;
        break;
    }
  }

  [[nodiscard]] OperatorKind kind() const noexcept { return kind_; }
  [[nodiscard]] Index horizon() const noexcept { return horizon_; }

  /// Entry (row, col); zero outside the tridiagonal band.
  [[nodiscard]] double operator()(Index row, Index col) const {
    if (col == row) return diag_(row);
    if (col == row - 1) return lower_(row);
    if (col == row + 1) return upper_(row);
    return 0.0;
  }

  // Coefficient of row t on columns t-1, t, t+1.
  [[nodiscard]] double sub(Index row) const { return lower_(row); }
  [[nodiscard]] double main(Index row) const { return diag_(row); }
  [[nodiscard]] double super(Index row) const { return upper_(row); }

  /// Operator times a T x n sample matrix.
  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    if (x.rows() != horizon_) {
      throw config_error("diffops", "horizon mismatch: operator " + std::to_string(horizon_) + ", trajectory " +
                                        std::to_string(x.rows()));
    }
    Eigen::MatrixXd out(x.rows(), x.cols());
    const Index last = horizon_ - 1;
    out.row(0) = diag_(0) * x.row(0) + upper_(0) * x.row(1);
    for (Index t = 1; t < last; ++t) {
      // neighbours summed first so interior Laplacian rows are exactly x(t) - 0.5 (x(t-1) + x(t+1))
      out.row(t) = diag_(t) * x.row(t) + (lower_(t) * x.row(t - 1) + upper_(t) * x.row(t + 1));
    }
    out.row(last) = lower_(last) * x.row(last - 1) + diag_(last) * x.row(last);
    return out;
  }

  [[nodiscard]] Eigen::MatrixXd apply(const Trajectory& x) const { return apply(x.samples()); }

  [[nodiscard]] Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(horizon_, horizon_);
    for (Index t = 0; t < horizon_; ++t) {
      m(t, t) = diag_(t);
      if (t > 0) m(t, t - 1) = lower_(t);
      if (t + 1 < horizon_) m(t, t + 1) = upper_(t);
    }
    return m;
  }

 private:
  OperatorKind kind_;
  Index horizon_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd diag_;
  Eigen::VectorXd upper_;
};

inline DiffOperator build_operator(OperatorKind kind, Index horizon) { return {kind, horizon}; }

}  // namespace mccb
