#pragma once

// Symmetric positive definite band matrices and their Cholesky factorization.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace mccb {

/// Lower band of a symmetric N x N matrix with half-bandwidth p.
/// Entry (i, j), j <= i <= j + p, lives at data[i * (p + 1) + (i - j)].
class SymmetricBand {
 public:
  SymmetricBand(Eigen::Index size, Eigen::Index half_bandwidth)
      : n_(size), p_(half_bandwidth), data_(static_cast<std::size_t>(size * (half_bandwidth + 1)), 0.0) {}

  [[nodiscard]] Eigen::Index size() const noexcept { return n_; }
  [[nodiscard]] Eigen::Index half_bandwidth() const noexcept { return p_; }

  /// Lower-triangle access; requires j <= i <= j + p.
  [[nodiscard]] double& lower(Eigen::Index i, Eigen::Index j) { return data_[index(i, j)]; }
  [[nodiscard]] double lower(Eigen::Index i, Eigen::Index j) const { return data_[index(i, j)]; }

  /// Symmetric read with zero outside the band.
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const {
    if (i < j) std::swap(i, j);
    return i - j > p_ ? 0.0 : data_[index(i, j)];
  }

  [[nodiscard]] Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, i - p_);
      for (Eigen::Index j = lo; j < i; ++j) {
        const double a = data_[index(i, j)];
        y(i) += a * x(j);
        y(j) += a * x(i);
      }
      y(i) += data_[index(i, i)] * x(i);
    }
    return y;
  }

  /// Max absolute row sum.
  [[nodiscard]] double inf_norm() const {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, i - p_);
      for (Eigen::Index j = lo; j < i; ++j) {
        const double a = std::abs(data_[index(i, j)]);
        rows(i) += a;
        rows(j) += a;
      }
      rows(i) += std::abs(data_[index(i, i)]);
    }
    return n_ > 0 ? rows.maxCoeff() : 0.0;
  }

  [[nodiscard]] Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
    }
    return m;
  }

 private:
  [[nodiscard]] std::size_t index(Eigen::Index i, Eigen::Index j) const {
    return static_cast<std::size_t>(i * (p_ + 1) + (i - j));
  }

  Eigen::Index n_;
  Eigen::Index p_;
  std::vector<double> data_;
};

/// Band Cholesky A = L L^T. Construction fails (empty optional) when a pivot
/// drops below `relative_floor` times its original diagonal entry.
class BandCholesky {
 public:
  static std::optional<BandCholesky> factor(const SymmetricBand& a, double relative_floor = 1e-11) {
    BandCholesky f(a);
    const Eigen::Index n = a.size();
    const Eigen::Index p = a.half_bandwidth();
    auto& l = f.factor_;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, j - p);
      double d = l.lower(j, j);
      for (Eigen::Index k = lo; k < j; ++k) d -= l.lower(j, k) * l.lower(j, k);
      if (!(d > relative_floor * std::abs(a.lower(j, j))) || !std::isfinite(d)) return std::nullopt;
      const double ljj = std::sqrt(d);
      l.lower(j, j) = ljj;
      const Eigen::Index hi = std::min(n - 1, j + p);
      for (Eigen::Index i = j + 1; i <= hi; ++i) {
        double s = l.lower(i, j);
        for (Eigen::Index k = std::max<Eigen::Index>(0, i - p); k < j; ++k) s -= l.lower(i, k) * l.lower(j, k);
        l.lower(i, j) = s / ljj;
      }
    }
    return f;
  }

  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const Eigen::Index n = factor_.size();
    const Eigen::Index p = factor_.half_bandwidth();
    Eigen::VectorXd y = b;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = std::max<Eigen::Index>(0, i - p); k < i; ++k) y(i) -= factor_.lower(i, k) * y(k);
      y(i) /= factor_.lower(i, i);
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      const Eigen::Index hi = std::min(n - 1, i + p);
      for (Eigen::Index k = i + 1; k <= hi; ++k) y(i) -= factor_.lower(k, i) * y(k);
      y(i) /= factor_.lower(i, i);
    }
    return y;
  }

 private:
  explicit BandCholesky(const SymmetricBand& a) : factor_(a) {}
  SymmetricBand factor_;
};

}  // namespace mccb
