#pragma once

// Gaussian mixture over joint (t, value) space, fitted by EM, and Gaussian
// mixture regression (conditioning on the scalar time coordinate).
//
// Row layout of joint data: column 0 is normalized time, columns 1..n the value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "mccb/error.hpp"
#include "mccb/trajectory.hpp"

namespace mccb {

struct GaussianComponent {
  double prior = 0.0;
  Eigen::VectorXd mean;        // [mu_t; mu_x]
  Eigen::MatrixXd covariance;  // [[S_t, S_tx]; [S_xt, S_x]]
};

class GaussianMixture {
 public:
  GaussianMixture() = default;

  explicit GaussianMixture(std::vector<GaussianComponent> components) : components_(std::move(components)) {
    if (components_.empty()) throw config_error("gmm", "mixture needs at least one component");
    const Index d = components_.front().mean.size();
    if (d < 2) throw config_error("gmm", "joint space must hold time plus at least one value dimension");
    double total = 0.0;
    for (const auto& c : components_) {
      if (c.mean.size() != d || c.covariance.rows() != d || c.covariance.cols() != d) {
        throw config_error("gmm", "component dimensions disagree");
      }
      if (!(c.prior > 0.0) || !c.mean.allFinite() || !c.covariance.allFinite()) {
        throw config_error("gmm", "component has non-positive prior or non-finite parameters");
      }
      if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, c.covariance.cwiseAbs().maxCoeff())) {
        throw config_error("gmm", "component covariance is not symmetric");
      }
      if (Eigen::LLT<Eigen::MatrixXd>(c.covariance).info() != Eigen::Success) {
        throw numerical_error("gmm", "component covariance is not positive definite");
      }
      total += c.prior;
    }
    if (std::abs(total - 1.0) > 1e-12) throw config_error("gmm", "priors do not sum to one");

    order_.resize(components_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [this](std::size_t a, std::size_t b) {
      return canonical_less(components_[a], components_[b]);
    });
  }

  [[nodiscard]] std::size_t size() const noexcept { return components_.size(); }
  [[nodiscard]] Index joint_dims() const { return components_.front().mean.size(); }
  [[nodiscard]] Index value_dims() const { return joint_dims() - 1; }
  [[nodiscard]] const GaussianComponent& operator[](std::size_t k) const { return components_[k]; }
  [[nodiscard]] const std::vector<GaussianComponent>& components() const noexcept { return components_; }

  /// Component indices in a labelling-independent order; sums over components follow it.
  [[nodiscard]] const std::vector<std::size_t>& canonical_order() const noexcept { return order_; }

 private:
  static bool canonical_less(const GaussianComponent& a, const GaussianComponent& b) {
    for (Index i = 0; i < a.mean.size(); ++i) {
      if (a.mean(i) != b.mean(i)) return a.mean(i) < b.mean(i);
    }
    if (a.prior != b.prior) return a.prior < b.prior;
    for (Index i = 0; i < a.covariance.size(); ++i) {
      if (a.covariance.data()[i] != b.covariance.data()[i]) return a.covariance.data()[i] < b.covariance.data()[i];
    }
    return false;
  }

  std::vector<GaussianComponent> components_;
  std::vector<std::size_t> order_;
};

enum class EmInit {
  time_bins,      // K contiguous equal-count bins along t
  random_points,  // K distinct data points drawn with the seed
};

struct EmConfig {
  double tol = 1e-8;  // relative log-likelihood change
  int max_iter = 300;
  double reg_scale = 1e-6;  // floor = reg_scale * mean diagonal of the data covariance
  EmInit init = EmInit::time_bins;
};

struct EmFit {
  GaussianMixture mixture;
  std::vector<double> log_likelihood;  // at initialization, then after every iteration
  int iterations = 0;
  bool converged = false;
  double regularization = 0.0;
};

namespace detail {

inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// Per-point log N(z; mean, cov) for each row z of `data`.
inline Eigen::VectorXd log_gaussian(const Eigen::MatrixXd& data, const Eigen::VectorXd& mean,
                                    const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw numerical_error("gmm", "covariance lost positive definiteness");
  const Eigen::MatrixXd diff = (data.rowwise() - mean.transpose()).transpose();
  const Eigen::MatrixXd y = llt.matrixL().solve(diff);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double d = static_cast<double>(mean.size());
  const double c = -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det);
  return (c - 0.5 * y.colwise().squaredNorm().array()).matrix().transpose();
}

inline Eigen::MatrixXd weighted_covariance(const Eigen::MatrixXd& data, const Eigen::VectorXd& w,
                                           const Eigen::VectorXd& mean, double weight_sum) {
  const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * w.asDiagonal() * centered / weight_sum;
  return 0.5 * (cov + cov.transpose());
}

// Raises every eigenvalue of a symmetric matrix to at least `floor`. This is the
// maximizer of the Gaussian likelihood over covariances >= floor * I, so EM with
// it keeps the log-likelihood monotone (adding floor * I would not).
inline Eigen::MatrixXd floor_eigenvalues(const Eigen::MatrixXd& cov, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw numerical_error("gmm", "eigendecomposition of a covariance failed");
  if (es.eigenvalues().minCoeff() >= floor) return cov;
  const Eigen::VectorXd lifted = es.eigenvalues().cwiseMax(floor);
  Eigen::MatrixXd out = es.eigenvectors() * lifted.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace detail

/// Log-likelihood of the rows of `data` under `model`.
inline double log_likelihood(const GaussianMixture& model, const Eigen::MatrixXd& data) {
  Eigen::MatrixXd logp(data.rows(), static_cast<Index>(model.size()));
  for (std::size_t k = 0; k < model.size(); ++k) {
    logp.col(static_cast<Index>(k)) =
        detail::log_gaussian(data, model[k].mean, model[k].covariance).array() + std::log(model[k].prior);
  }
  double ll = 0.0;
  for (Index i = 0; i < data.rows(); ++i) ll += detail::log_sum_exp(logp.row(i).transpose());
  return ll;
}

/// Expectation-maximization for a K-component full-covariance mixture.
inline EmFit fit_em(const Eigen::MatrixXd& data, int components, std::uint64_t seed, const EmConfig& config = {}) {
  const Index n = data.rows();
  const Index d = data.cols();
  const auto k_count = static_cast<Index>(components);
  if (components < 1) throw config_error("gmm", "component count must be positive");
  if (d < 2) throw config_error("gmm", "joint data needs a time column and at least one value column");
  if (n < k_count * d) {
    throw config_error("gmm", "not enough samples (" + std::to_string(n) + ") for " + std::to_string(components) +
                                  " components in " + std::to_string(d) + " dimensions");
  }
  if (!data.allFinite()) throw config_error("gmm", "non-finite training data");

  const Eigen::VectorXd grand_mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd data_cov = detail::weighted_covariance(data, Eigen::VectorXd::Ones(n), grand_mean,
                                                               static_cast<double>(n));
  double reg_floor = config.reg_scale * data_cov.diagonal().mean();
  if (!(reg_floor > 0.0)) reg_floor = config.reg_scale;

  std::vector<GaussianComponent> comps(static_cast<std::size_t>(components));
  if (config.init == EmInit::time_bins) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return data(a, 0) < data(b, 0); });
    for (Index k = 0; k < k_count; ++k) {
      const Index lo = k * n / k_count;
      const Index hi = (k + 1) * n / k_count;
      Eigen::MatrixXd bin(hi - lo, d);
      for (Index i = lo; i < hi; ++i) bin.row(i - lo) = data.row(idx[static_cast<std::size_t>(i)]);
      auto& c = comps[static_cast<std::size_t>(k)];
      c.prior = static_cast<double>(hi - lo) / static_cast<double>(n);
      c.mean = bin.colwise().mean().transpose();
      c.covariance = detail::floor_eigenvalues(
          detail::weighted_covariance(bin, Eigen::VectorXd::Ones(bin.rows()), c.mean, static_cast<double>(bin.rows())),
          reg_floor);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index k = 0; k < k_count; ++k) {
      std::uniform_int_distribution<Index> pick(k, n - 1);
      std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick(rng))]);
      auto& c = comps[static_cast<std::size_t>(k)];
      c.prior = 1.0 / static_cast<double>(components);
      c.mean = data.row(idx[static_cast<std::size_t>(k)]).transpose();
      c.covariance = detail::floor_eigenvalues(data_cov, reg_floor);
    }
  }

  EmFit fit;
  fit.regularization = reg_floor;
  Eigen::MatrixXd logp(n, k_count);
  auto e_step = [&](const std::vector<GaussianComponent>& cs) {
    for (Index k = 0; k < k_count; ++k) {
      const auto& c = cs[static_cast<std::size_t>(k)];
      logp.col(k) = detail::log_gaussian(data, c.mean, c.covariance).array() + std::log(c.prior);
    }
    double ll = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double lse = detail::log_sum_exp(logp.row(i).transpose());
      logp.row(i).array() = (logp.row(i).array() - lse).exp();
      ll += lse;
    }
    return ll;  // logp now holds responsibilities
  };

  double ll = e_step(comps);
  fit.log_likelihood.push_back(ll);
  for (int iter = 0; iter < config.max_iter; ++iter) {
    const Eigen::VectorXd mass = logp.colwise().sum().transpose();
    const double total_mass = mass.sum();
    for (Index k = 0; k < k_count; ++k) {
      const double nk = mass(k);
      if (!(nk > 1e-10 * static_cast<double>(n))) {
        throw numerical_error("gmm", "component " + std::to_string(k) + " collapsed (effective count " +
                                         std::to_string(nk) + ") at iteration " + std::to_string(iter));
      }
      auto& c = comps[static_cast<std::size_t>(k)];
      const Eigen::VectorXd w = logp.col(k);
      c.prior = nk / total_mass;
      c.mean = (data.transpose() * w) / nk;
      c.covariance = detail::floor_eigenvalues(detail::weighted_covariance(data, w, c.mean, nk), reg_floor);
    }
    const double next = e_step(comps);
    fit.log_likelihood.push_back(next);
    fit.iterations = iter + 1;
    const double change = std::abs(next - ll);
    ll = next;
    if (change <= config.tol * std::max(std::abs(ll), std::numeric_limits<double>::min())) {
      fit.converged = true;
      break;
    }
  }
  fit.mixture = GaussianMixture(std::move(comps));
  return fit;
}

/// GMR output at one time instant.
struct Conditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  bool extrapolated = false;  // every component density underflowed; nearest component used
};

/// Responsibilities h_k(t), indexed like the mixture's components.
inline Eigen::VectorXd responsibilities(const GaussianMixture& model, double t, bool* extrapolated = nullptr) {
  const auto k_count = static_cast<Index>(model.size());
  Eigen::VectorXd logw(k_count);
  for (Index k = 0; k < k_count; ++k) {
    const auto& c = model[static_cast<std::size_t>(k)];
    const double var = c.covariance(0, 0);
    const double dt = t - c.mean(0);
    logw(k) = std::log(c.prior) - 0.5 * (std::log(2.0 * std::numbers::pi * var) + dt * dt / var);
  }
  // canonical order so ties resolve the same way under relabelling
  std::size_t best = model.canonical_order().front();
  for (std::size_t k : model.canonical_order()) {
    if (logw(static_cast<Index>(k)) > logw(static_cast<Index>(best))) best = k;
  }
  const double top = logw(static_cast<Index>(best));
  Eigen::VectorXd h = Eigen::VectorXd::Zero(k_count);
  const bool far = top < std::log(std::numeric_limits<double>::min());
  if (extrapolated != nullptr) *extrapolated = far;
  if (far) {
    h(static_cast<Index>(best)) = 1.0;
    return h;
  }
  double total = 0.0;
  for (std::size_t k : model.canonical_order()) {
    h(static_cast<Index>(k)) = std::exp(logw(static_cast<Index>(k)) - top);
    total += h(static_cast<Index>(k));
  }
  return h / total;
}

/// Conditional mean and covariance of the value given time t.
inline Conditional condition(const GaussianMixture& model, double t) {
  if (!std::isfinite(t)) throw config_error("gmm", "conditioning time must be finite");
  Conditional out;
  const Eigen::VectorXd h = responsibilities(model, t, &out.extrapolated);
  const Index n = model.value_dims();
  out.mean = Eigen::VectorXd::Zero(n);
  out.covariance = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k : model.canonical_order()) {
    const double hk = h(static_cast<Index>(k));
    if (hk == 0.0) continue;
    const auto& c = model[k];
    const double var_t = c.covariance(0, 0);
    const Eigen::VectorXd cross = c.covariance.col(0).tail(n);  // S_xt
    out.mean += hk * (c.mean.tail(n) + cross * ((t - c.mean(0)) / var_t));
    out.covariance += (hk * hk) * (c.covariance.bottomRightCorner(n, n) - cross * cross.transpose() / var_t);
  }
  return out;
}

}  // namespace mccb
