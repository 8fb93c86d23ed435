#pragma once

// Cost balancing. Weights factor as w_i = alpha_i / beta_i: beta normalizes the
// typical magnitude of each coordinate cost over the demonstrations, alpha is
// chosen on the probability simplex to minimize the training reproduction SSE.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mccb/error.hpp"
#include "mccb/metrics.hpp"
#include "mccb/reproduce.hpp"
#include "mccb/trajectory.hpp"

namespace mccb {

using Simplex3 = std::array<double, 3>;  // (cartesian, tangent, laplacian)

struct BetaEstimate {
  Simplex3 beta{};
  Simplex3 totals{};       // summed demonstration cost per coordinate
  bool degenerate = false;  // every total below the floor; beta set uniform
};

inline constexpr double kBetaFloor = 1e-12;

/// Normalizes per-coordinate cost totals into scale factors on the open simplex.
inline BetaEstimate estimate_beta(const Simplex3& totals) {
  BetaEstimate out;
  out.totals = totals;
  if (std::all_of(totals.begin(), totals.end(), [](double v) { return !(v >= kBetaFloor); })) {
    out.beta = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    out.degenerate = true;
    return out;
  }
  Simplex3 clamped{};
  for (std::size_t i = 0; i < 3; ++i) clamped[i] = std::max(totals[i], kBetaFloor);
  const double sum = clamped[0] + clamped[1] + clamped[2];
  for (std::size_t i = 0; i < 3; ++i) out.beta[i] = clamped[i] / sum;
  return out;
}

/// Sums J_i over the demonstrations for each coordinate.
inline BetaEstimate estimate_beta(const Reproducer& reproducer, const DemonstrationSet& demos) {
  Simplex3 totals{0.0, 0.0, 0.0};
  for (const auto& d : demos.demos()) {
    for (auto c : kCoordinates) totals[slot(c)] += reproducer.cost(c, d.samples());
  }
  return estimate_beta(totals);
}

inline WeightTriple weights_from(const Simplex3& alpha, const Simplex3& beta) {
  return {alpha[0] / beta[0], alpha[1] / beta[1], alpha[2] / beta[2]};
}

/// Per-demo SSE of the reproductions under `weights`; empty when the problem is singular.
inline std::optional<std::vector<double>> reproduction_sse(const Reproducer& reproducer,
                                                           const DemonstrationSet& demos,
                                                           const std::vector<ConstraintSet>& constraints,
                                                           const WeightTriple& weights) {
  std::vector<Reproduction> repro;
  try {
    repro = reproducer.solve_many(weights, constraints, SolverKind::automatic, /*with_costs=*/false);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::infeasible) return std::nullopt;
    throw;
  }
  std::vector<double> out;
  out.reserve(repro.size());
  for (std::size_t j = 0; j < repro.size(); ++j) {
    out.push_back(metrics::sse(repro[j].trajectory.samples(), demos[j].samples()));
  }
  return out;
}

inline double total_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

/// Points of the simplex lattice with spacing `step`.
inline std::vector<Simplex3> simplex_lattice(double step) {
  if (!(step > 0.0) || step > 0.5) throw config_error("balance", "grid step must lie in (0, 0.5]");
  std::vector<Simplex3> pts;
  const double inv = 1.0 / step;
  const double rounded = std::round(inv);
  if (std::abs(rounded - inv) <= 1e-9 * inv) {
    const auto m = static_cast<long>(rounded);
    const auto md = static_cast<double>(m);
    for (long i = 0; i <= m; ++i) {
      for (long j = 0; i + j <= m; ++j) {
        pts.push_back({static_cast<double>(i) / md, static_cast<double>(j) / md, static_cast<double>(m - i - j) / md});
      }
    }
    return pts;
  }
  const auto m = static_cast<long>(std::floor(inv));
  for (long i = 0; i <= m; ++i) {
    for (long j = 0; i + j <= m; ++j) {
      const double a = static_cast<double>(i) * step;
      const double b = static_cast<double>(j) * step;
      pts.push_back({a, b, std::max(0.0, 1.0 - a - b)});
    }
  }
  return pts;
}

/// Euclidean projection onto {x >= 0, sum x = 1}.
inline Simplex3 project_to_simplex(const Simplex3& p) {
  Simplex3 s = p;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  Simplex3 out{};
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = p[i] - theta;
    if (out[i] < 1e-12) out[i] = 0.0;  // drop round-off residue
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

enum class CandidateStage { lattice, anchor, refine };

inline std::string_view to_string(CandidateStage s) {
  switch (s) {
    case CandidateStage::lattice:
      return "lattice";
    case CandidateStage::anchor:
      return "anchor";
    case CandidateStage::refine:
      return "refine";
  }
  return "?";
}

struct Candidate {
  Simplex3 alpha{};
  std::optional<double> objective;  // empty when the inner problem was singular
  CandidateStage stage = CandidateStage::lattice;
};

struct BalanceOptions {
  double grid_step = 0.05;
  bool refine = true;
};

struct BalanceResult {
  Simplex3 alpha{};
  Simplex3 beta{};
  WeightTriple weights;
  std::vector<double> training_sse;  // per demo
  double total_sse = 0.0;
  std::vector<Candidate> grid_log;
  bool degenerate_beta = false;
};

namespace detail {

// objective first, then lexicographic alpha
inline bool candidate_less(double obj_a, const Simplex3& a, double obj_b, const Simplex3& b) {
  if (obj_a != obj_b) return obj_a < obj_b;
  return a < b;
}

}  // namespace detail

/// Exhaustive simplex lattice search for alpha, followed by one refinement pass at
/// step/10 inside the l-inf ball of radius `step` around the lattice winner.
/// The vertices, the barycenter and alpha = beta (which reproduces unit weights) are
/// always evaluated, so the result is never worse than any of those settings.
inline BalanceResult optimize_alpha(const Reproducer& reproducer, const DemonstrationSet& demos, const Simplex3& beta,
                                    const std::vector<ConstraintSet>& per_demo_constraints,
                                    const BalanceOptions& options = {}) {
  if (per_demo_constraints.size() != demos.size()) {
    throw config_error("balance", "need one constraint set per demonstration");
  }
  for (double b : beta) {
    if (!(b > 0.0) || b > 1.0) throw config_error("balance", "beta entries must lie in (0, 1]");
  }

  BalanceResult result;
  result.beta = beta;
  std::optional<std::size_t> best;

  auto evaluate = [&](const Simplex3& alpha, CandidateStage stage) {
    for (const auto& c : result.grid_log) {
      if (c.alpha == alpha) return;
    }
    Candidate cand{alpha, std::nullopt, stage};
    if (auto sse = reproduction_sse(reproducer, demos, per_demo_constraints, weights_from(alpha, beta))) {
      cand.objective = total_of(*sse);
    }
    result.grid_log.push_back(cand);
    if (!cand.objective) return;
    const auto& bc = best ? result.grid_log[*best] : cand;
    if (!best || detail::candidate_less(*cand.objective, cand.alpha, *bc.objective, bc.alpha)) {
      best = result.grid_log.size() - 1;
    }
  };

  for (const auto& a : simplex_lattice(options.grid_step)) evaluate(a, CandidateStage::lattice);
  const double third = 1.0 / 3.0;
  for (const Simplex3& a : {Simplex3{1.0, 0.0, 0.0}, Simplex3{0.0, 1.0, 0.0}, Simplex3{0.0, 0.0, 1.0},
                            Simplex3{third, third, third}, beta}) {
    evaluate(a, CandidateStage::anchor);
  }
  if (!best) throw infeasible_error("balance", "every weighting candidate produced a singular reproduction problem");

  if (options.refine) {
    const Simplex3 center = result.grid_log[*best].alpha;
    const double h = options.grid_step / 10.0;
    for (int i = -10; i <= 10; ++i) {
      for (int j = -10; j <= 10; ++j) {
        if (std::abs(i + j) > 10) continue;
        const Simplex3 p{center[0] + i * h, center[1] + j * h, center[2] - (i + j) * h};
        evaluate(project_to_simplex(p), CandidateStage::refine);
      }
    }
  }

  const auto& win = result.grid_log[*best];
  result.alpha = win.alpha;
  result.weights = weights_from(win.alpha, beta);
  result.training_sse = *reproduction_sse(reproducer, demos, per_demo_constraints, result.weights);
  result.total_sse = total_of(result.training_sse);
  return result;
}

/// Convenience: default endpoint constraints, beta from the demonstrations.
inline BalanceResult balance(const Reproducer& reproducer, const DemonstrationSet& demos,
                             const BalanceOptions& options = {}) {
  std::vector<ConstraintSet> constraints;
  for (const auto& d : demos.demos()) constraints.push_back(ConstraintSet::endpoints(d));
  const auto beta = estimate_beta(reproducer, demos);
  auto result = optimize_alpha(reproducer, demos, beta.beta, constraints, options);
  result.degenerate_beta = beta.degenerate;
  return result;
}

/// The five weight settings compared in evaluations.
enum class Method { cartesian, tangent, laplacian, uniform, mccb };

inline constexpr std::array<Method, 5> kMethods = {Method::cartesian, Method::tangent, Method::laplacian,
                                                   Method::uniform, Method::mccb};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::cartesian:
      return "cartesian";
    case Method::tangent:
      return "tangent";
    case Method::laplacian:
      return "laplacian";
    case Method::uniform:
      return "uniform";
    case Method::mccb:
      return "mccb";
  }
  return "?";
}

inline Method method_from_string(std::string_view s) {
  for (auto m : kMethods) {
    if (to_string(m) == s) return m;
  }
  throw config_error("balance", "unknown method '" + std::string(s) + "'");
}

/// Baselines use their literal weights; only MCCB applies alpha / beta.
inline WeightTriple method_weights(Method m, const BalanceResult& balance) {
  switch (m) {
    case Method::cartesian:
      return {1.0, 0.0, 0.0};
    case Method::tangent:
      return {0.0, 1.0, 0.0};
    case Method::laplacian:
      return {0.0, 0.0, 1.0};
    case Method::uniform:
      return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    case Method::mccb:
      return balance.weights;
  }
  return {};
}

}  // namespace mccb
