#pragma once

// JSON documents for trained models, balancing results and reproductions.
//
// Mixture:
//   {"coordinate": "tangent", "K": 5, "seed": 0, "regularization": 1e-9,
//    "em_iterations": 42, "em_converged": true,
//    "priors": [...K], "means": [[t, x1..xn] ...K],
//    "covariances": [[[row] ...1+n] ...K]}
// Model bundle:
//   {"format": "mccb-model", "version": 1, "horizon": T, "dims": n,
//    "time": "index/(T-1)", "mixtures": {"cartesian": {...}, "tangent": {...}, "laplacian": {...}}}
// Balance:
//   {"format": "mccb-balance", "version": 1, "alpha": {...}, "beta": {...}, "weights": {...},
//    "beta_totals": {...}, "degenerate_beta": false, "grid_step": 0.05,
//    "training_sse": {"labels": [...], "per_demo": [...], "total": x},
//    "grid_log": [{"alpha": [c, g, l], "objective": x | null, "stage": "lattice"}, ...]}

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mccb/balance.hpp"
#include "mccb/error.hpp"
#include "mccb/metrics.hpp"
#include "mccb/multicoord.hpp"
#include "mccb/reproduce.hpp"

namespace mccb::serialize {

using nlohmann::json;

inline constexpr int kVersion = 1;

namespace detail {

inline json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json matrix_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
  return a;
}

inline Eigen::VectorXd vector_from(const json& a) {
  if (!a.is_array()) throw config_error("serialize", "expected a numeric array");
  Eigen::VectorXd v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Index>(i)) = a[i].get<double>();
  return v;
}

inline Eigen::MatrixXd matrix_from(const json& a) {
  if (!a.is_array() || a.empty()) throw config_error("serialize", "expected a non-empty matrix");
  const auto cols = a[0].size();
  Eigen::MatrixXd m(static_cast<Index>(a.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (!a[r].is_array() || a[r].size() != cols) throw config_error("serialize", "ragged matrix");
    m.row(static_cast<Index>(r)) = vector_from(a[r]).transpose();
  }
  return m;
}

inline json triple_json(double c, double g, double l) {
  return {{"cartesian", c}, {"tangent", g}, {"laplacian", l}};
}

inline Simplex3 triple_from(const json& j) {
  return {j.at("cartesian").get<double>(), j.at("tangent").get<double>(), j.at("laplacian").get<double>()};
}

}  // namespace detail

inline json to_json(const CoordinateModel& m, Coordinate c) {
  json priors = json::array();
  json means = json::array();
  json covs = json::array();
  for (const auto& comp : m.mixture.components()) {
    priors.push_back(comp.prior);
    means.push_back(detail::vector_json(comp.mean));
    covs.push_back(detail::matrix_json(comp.covariance));
  }
  return {{"coordinate", std::string(to_string(c))},
          {"K", m.components},
          {"seed", m.seed},
          {"regularization", m.regularization},
          {"em_iterations", m.em_iterations},
          {"em_converged", m.em_converged},
          {"priors", priors},
          {"means", means},
          {"covariances", covs}};
}

inline CoordinateModel coordinate_model_from_json(const json& j) {
  try {
    const auto& priors = j.at("priors");
    const auto& means = j.at("means");
    const auto& covs = j.at("covariances");
    if (priors.size() != means.size() || priors.size() != covs.size()) {
      throw config_error("serialize", "mixture arrays disagree on component count");
    }
    std::vector<GaussianComponent> comps;
    for (std::size_t k = 0; k < priors.size(); ++k) {
      comps.push_back({priors[k].get<double>(), detail::vector_from(means[k]), detail::matrix_from(covs[k])});
    }
    CoordinateModel m;
    m.mixture = GaussianMixture(std::move(comps));
    m.components = j.at("K").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.regularization = j.value("regularization", 0.0);
    m.em_iterations = j.value("em_iterations", 0);
    m.em_converged = j.value("em_converged", false);
    if (static_cast<std::size_t>(m.components) != m.mixture.size()) {
      throw config_error("serialize", "K does not match the number of components");
    }
    return m;
  } catch (const json::exception& e) {
    throw config_error("serialize", std::string("malformed mixture: ") + e.what());
  }
}

inline json to_json(const MultiCoordModel& model) {
  json mixtures = json::object();
  for (auto c : kCoordinates) mixtures[std::string(to_string(c))] = to_json(model.model(c), c);
  return {{"format", "mccb-model"},
          {"version", kVersion},
          {"horizon", model.horizon()},
          {"dims", model.dims()},
          {"time", "index/(T-1)"},
          {"mixtures", mixtures}};
}

inline MultiCoordModel model_from_json(const json& j) {
  try {
    if (j.at("format") != "mccb-model") throw config_error("serialize", "not a model document");
    if (j.at("version").get<int>() != kVersion) throw config_error("serialize", "unsupported model version");
    std::array<CoordinateModel, 3> models;
    for (auto c : kCoordinates) {
      models[slot(c)] = coordinate_model_from_json(j.at("mixtures").at(std::string(to_string(c))));
    }
    return {std::move(models), j.at("horizon").get<Index>(), j.at("dims").get<Index>()};
  } catch (const json::exception& e) {
    throw config_error("serialize", std::string("malformed model: ") + e.what());
  }
}

inline json to_json(const BalanceResult& b, const std::vector<std::string>& labels, double grid_step,
                    const Simplex3& beta_totals) {
  json log = json::array();
  for (const auto& c : b.grid_log) {
    log.push_back({{"alpha", {c.alpha[0], c.alpha[1], c.alpha[2]}},
                   {"objective", c.objective ? json(*c.objective) : json(nullptr)},
                   {"stage", std::string(to_string(c.stage))}});
  }
  return {{"format", "mccb-balance"},
          {"version", kVersion},
          {"alpha", detail::triple_json(b.alpha[0], b.alpha[1], b.alpha[2])},
          {"beta", detail::triple_json(b.beta[0], b.beta[1], b.beta[2])},
          {"weights", detail::triple_json(b.weights.cartesian, b.weights.tangent, b.weights.laplacian)},
          {"beta_totals", detail::triple_json(beta_totals[0], beta_totals[1], beta_totals[2])},
          {"degenerate_beta", b.degenerate_beta},
          {"grid_step", grid_step},
          {"training_sse", {{"labels", labels}, {"per_demo", b.training_sse}, {"total", b.total_sse}}},
          {"grid_log", log}};
}

inline BalanceResult balance_from_json(const json& j) {
  try {
    if (j.at("format") != "mccb-balance") throw config_error("serialize", "not a balance document");
    if (j.at("version").get<int>() != kVersion) throw config_error("serialize", "unsupported balance version");
    BalanceResult b;
    b.alpha = detail::triple_from(j.at("alpha"));
    b.beta = detail::triple_from(j.at("beta"));
    b.weights = weights_from(b.alpha, b.beta);
    b.degenerate_beta = j.value("degenerate_beta", false);
    b.training_sse = j.at("training_sse").at("per_demo").get<std::vector<double>>();
    b.total_sse = j.at("training_sse").at("total").get<double>();
    for (const auto& c : j.at("grid_log")) {
      Candidate cand;
      const auto a = c.at("alpha").get<std::vector<double>>();
      if (a.size() != 3) throw config_error("serialize", "grid_log alpha must have three entries");
      cand.alpha = {a[0], a[1], a[2]};
      if (!c.at("objective").is_null()) cand.objective = c.at("objective").get<double>();
      const auto stage = c.at("stage").get<std::string>();
      cand.stage = stage == "anchor" ? CandidateStage::anchor
                   : stage == "refine" ? CandidateStage::refine
                                       : CandidateStage::lattice;
      b.grid_log.push_back(cand);
    }
    return b;
  } catch (const json::exception& e) {
    throw config_error("serialize", std::string("malformed balance: ") + e.what());
  }
}

inline json to_json(const Reproduction& r, const std::string& id, const WeightTriple& w) {
  return {{"id", id},
          {"weights", detail::triple_json(w.cartesian, w.tangent, w.laplacian)},
          {"costs", detail::triple_json(r.costs.cartesian, r.costs.tangent, r.costs.laplacian)},
          {"kkt_residual", r.kkt_residual},
          {"constraint_residual", r.constraint_residual},
          {"horizon", r.trajectory.length()},
          {"dims", r.trajectory.dims()}};
}

inline json to_json(const metrics::MetricReport& m) {
  json j = {{"sse", m.sse}, {"dtwd", m.dtwd}, {"frechet", m.frechet}};
  if (m.sea) j["sea"] = *m.sea;
  return j;
}

}  // namespace mccb::serialize
