#pragma once

// End-to-end workflow behind the command line tool: load -> align -> train ->
// balance, then compare the five weight settings or reproduce under new constraints.
//
// Run configuration (JSON, every key optional except "dataset"):
//   {"dataset": "demos/", "format": "csv-dir", "target_T": null, "reference": null,
//    "align": true, "K": 5, "seed": 0, "grid_step": 0.05, "endpoint_mode": "both",
//    "via_points": [{"demo": "demo_03", "t": 100, "value": [1.0, 2.0]}],
//    "output": "mccb_out", "baselines": ["cartesian", "tangent", "laplacian", "uniform"]}
//
// "demo" in a via point is a label or a zero-based index; "t" indexes the aligned horizon.
// endpoint_mode is one of both | start | goal | none.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "mccb/balance.hpp"
#include "mccb/error.hpp"
#include "mccb/io.hpp"
#include "mccb/metrics.hpp"
#include "mccb/multicoord.hpp"
#include "mccb/reproduce.hpp"
#include "mccb/serialize.hpp"
#include "mccb/trajectory.hpp"

namespace mccb {

inline constexpr const char* kLibraryVersion = "0.1.0";

namespace pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

struct ViaPoint {
  std::string demo;  // label, or a decimal index
  Index t = 0;
  std::vector<double> value;
};

struct RunConfig {
  std::string dataset;
  std::string format = "csv-dir";
  std::optional<Index> target_T;
  std::optional<std::size_t> reference;  // alignment reference; medoid when empty
  bool align = true;
  int K = 5;
  std::uint64_t seed = 0;
  double grid_step = 0.05;
  std::string endpoint_mode = "both";
  std::vector<ViaPoint> via_points;
  std::string output = "mccb_out";
  std::vector<std::string> baselines = {"cartesian", "tangent", "laplacian", "uniform"};

  void validate() const {
    if (dataset.empty()) throw config_error("config", "dataset is required");
    (void)io::format_from_string(format);
    if (target_T && *target_T < Trajectory::kMinLength) throw config_error("config", "target_T must be at least 3");
    if (K < 1) throw config_error("config", "K must be positive");
    if (!(grid_step > 0.0) || grid_step > 0.5) throw config_error("config", "grid_step must lie in (0, 0.5]");
    if (endpoint_mode != "both" && endpoint_mode != "start" && endpoint_mode != "goal" && endpoint_mode != "none") {
      throw config_error("config", "endpoint_mode must be one of both, start, goal, none");
    }
    for (const auto& b : baselines) {
      const auto m = method_from_string(b);
      if (m == Method::mccb) throw config_error("config", "mccb is always evaluated; list only baselines");
    }
    for (const auto& v : via_points) {
      if (v.t < 0) throw config_error("config", "via point time index must be non-negative");
      if (v.value.empty()) throw config_error("config", "via point needs a value");
    }
    if (output.empty()) throw config_error("config", "output directory is required");
  }
};

inline json to_json(const RunConfig& c) {
  json via = json::array();
  for (const auto& v : c.via_points) via.push_back({{"demo", v.demo}, {"t", v.t}, {"value", v.value}});
  return {{"dataset", c.dataset},
          {"format", c.format},
          {"target_T", c.target_T ? json(*c.target_T) : json(nullptr)},
          {"reference", c.reference ? json(*c.reference) : json(nullptr)},
          {"align", c.align},
          {"K", c.K},
          {"seed", c.seed},
          {"grid_step", c.grid_step},
          {"endpoint_mode", c.endpoint_mode},
          {"via_points", via},
          {"output", c.output},
          {"baselines", c.baselines}};
}

inline std::vector<ViaPoint> via_points_from_json(const json& j) {
  if (!j.is_array()) throw config_error("config", "via_points must be an array");
  std::vector<ViaPoint> out;
  for (const auto& e : j) {
    ViaPoint v;
    const auto& d = e.at("demo");
    v.demo = d.is_string() ? d.get<std::string>() : std::to_string(d.get<long long>());
    v.t = e.at("t").get<Index>();
    v.value = e.at("value").get<std::vector<double>>();
    out.push_back(std::move(v));
  }
  return out;
}

/// Applies the keys present in `j` on top of `c`. Unknown keys are rejected.
inline void merge(RunConfig& c, const json& j) {
  if (!j.is_object()) throw config_error("config", "configuration must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "dataset") {
        c.dataset = v.get<std::string>();
      } else if (key == "format") {
        c.format = v.get<std::string>();
      } else if (key == "target_T") {
        c.target_T = v.is_null() ? std::nullopt : std::optional<Index>(v.get<Index>());
      } else if (key == "reference") {
        c.reference = v.is_null() ? std::nullopt : std::optional<std::size_t>(v.get<std::size_t>());
      } else if (key == "align") {
        c.align = v.get<bool>();
      } else if (key == "K") {
        c.K = v.get<int>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "grid_step") {
        c.grid_step = v.get<double>();
      } else if (key == "endpoint_mode") {
        c.endpoint_mode = v.get<std::string>();
      } else if (key == "via_points") {
        c.via_points = via_points_from_json(v);
      } else if (key == "output") {
        c.output = v.get<std::string>();
      } else if (key == "baselines") {
        c.baselines = v.get<std::vector<std::string>>();
      } else {
        throw config_error("config", "unknown configuration key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw config_error("config", std::string("bad value: ") + e.what());
  }
}

inline json read_json_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw config_error("io", "cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw config_error("io", file.string() + ": " + e.what());
  }
}

inline void write_json_file(const fs::path& file, const json& j) { io::write_text(file, j.dump(2) + "\n"); }

inline RunConfig load_config(const fs::path& file) {
  RunConfig c;
  merge(c, read_json_file(file));
  return c;
}

/// Loads and (optionally) DTW-aligns the demonstrations named by the configuration.
inline DemonstrationSet prepare_demonstrations(const RunConfig& c) {
  auto raw = io::load_demonstrations(c.dataset, io::format_from_string(c.format));
  if (!c.align) {
    if (!c.target_T) return raw;
    std::vector<Trajectory> out;
    for (const auto& d : raw.demos()) {
      const double dt = d.dt() * static_cast<double>(d.length() - 1) / static_cast<double>(*c.target_T - 1);
      out.emplace_back(resample(d.samples(), *c.target_T), dt);
    }
    return {std::move(out), raw.labels()};
  }
  if (c.reference) {
    if (*c.reference >= raw.size()) throw config_error("config", "reference index out of range");
    return dtw_align(raw, *c.reference, c.target_T);
  }
  return dtw_align_to_medoid(raw, c.target_T);
}

inline std::size_t demo_index(const DemonstrationSet& demos, const std::string& key) {
  const auto& labels = demos.labels();
  if (auto it = std::find(labels.begin(), labels.end(), key); it != labels.end()) {
    return static_cast<std::size_t>(it - labels.begin());
  }
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
  if (ec == std::errc() && ptr == key.data() + key.size() && idx < demos.size()) return idx;
  throw config_error("config", "via point refers to unknown demonstration '" + key + "'");
}

/// Per-demo constraint sets: endpoints per endpoint_mode plus the configured via points.
inline std::vector<ConstraintSet> demo_constraints(const RunConfig& c, const DemonstrationSet& demos) {
  std::vector<ConstraintSet> out;
  for (const auto& d : demos.demos()) {
    ConstraintSet cs(d.length(), d.dims());
    if (c.endpoint_mode == "both" || c.endpoint_mode == "start") cs.pin(0, d.front());
    if (c.endpoint_mode == "both" || c.endpoint_mode == "goal") cs.pin(d.length() - 1, d.back());
    out.push_back(std::move(cs));
  }
  for (const auto& v : c.via_points) {
    const auto j = demo_index(demos, v.demo);
    if (static_cast<Index>(v.value.size()) != demos.dims()) {
      throw config_error("config", "via point value has the wrong dimension");
    }
    if (v.t >= demos[j].length()) throw config_error("config", "via point time index beyond the horizon");
    out[j].pin(v.t, Eigen::Map<const Eigen::RowVectorXd>(v.value.data(), static_cast<Index>(v.value.size())));
  }
  return out;
}

inline json manifest(const RunConfig& c, const DemonstrationSet& demos) {
  return {{"tool", "mccb"},
          {"version", kLibraryVersion},
          {"libraries",
           {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
          {"config", to_json(c)},
          {"seed", c.seed},
          {"demonstrations", demos.labels()},
          {"horizon", demos.horizon()},
          {"dims", demos.dims()}};
}

struct TrainOutcome {
  MultiCoordModel model;
  BalanceResult balance;
  BetaEstimate beta;
  std::vector<std::string> warnings;
};

/// Trains, balances and writes model.json, balance.json and manifest.json.
inline TrainOutcome run_train(const RunConfig& c) {
  c.validate();
  const auto demos = prepare_demonstrations(c);
  const auto constraints = demo_constraints(c, demos);
  std::vector<std::string> warnings;
  if (demos.size() == 1) warnings.emplace_back("single demonstration: balancing degenerate");

  auto model = train(demos, TrainOptions::uniform(c.K, c.seed));
  const Reproducer reproducer(model);
  const auto beta = estimate_beta(reproducer, demos);
  if (beta.degenerate) warnings.emplace_back("all coordinate costs at the floor: using uniform beta");
  BalanceOptions opts;
  opts.grid_step = c.grid_step;
  auto balance = optimize_alpha(reproducer, demos, beta.beta, constraints, opts);
  balance.degenerate_beta = beta.degenerate;

  fs::create_directories(c.output);
  const fs::path out(c.output);
  write_json_file(out / "model.json", serialize::to_json(model));
  write_json_file(out / "balance.json", serialize::to_json(balance, demos.labels(), c.grid_step, beta.totals));
  auto man = manifest(c, demos);
  man["command"] = "train";
  write_json_file(out / "manifest.json", man);
  return {std::move(model), std::move(balance), beta, std::move(warnings)};
}

struct CompareRow {
  std::string demo;
  Method method = Method::mccb;
  std::optional<metrics::MetricReport> report;  // empty when infeasible
  std::optional<Eigen::MatrixXd> reproduction;
};

struct CompareOutcome {
  std::vector<CompareRow> rows;
  std::map<Method, double> total_sse;  // feasible methods only
  std::vector<std::string> warnings;
};

inline std::vector<Method> compared_methods(const RunConfig& c) {
  std::vector<Method> out;
  for (auto m : kMethods) {
    if (m == Method::mccb || std::find(c.baselines.begin(), c.baselines.end(), to_string(m)) != c.baselines.end()) {
      out.push_back(m);
    }
  }
  return out;
}

namespace detail {

inline std::string median_text(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  const double med = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  return io::format_number(med);
}

inline std::string opt_number(const std::optional<double>& v) { return v ? io::format_number(*v) : std::string(); }

}  // namespace detail

/// Evaluates every weight setting on every demo and writes compare_per_demo.csv,
/// compare_summary.csv and overlays.csv. Needs the artifacts written by run_train.
inline CompareOutcome run_compare(const RunConfig& c) {
  c.validate();
  const fs::path out(c.output);
  const auto model = serialize::model_from_json(read_json_file(out / "model.json"));
  const auto balance = serialize::balance_from_json(read_json_file(out / "balance.json"));
  const auto demos = prepare_demonstrations(c);
  if (model.horizon() != demos.horizon() || model.dims() != demos.dims()) {
    throw config_error("compare", "trained artifacts do not match the dataset (horizon or dimension differs)");
  }
  const auto constraints = demo_constraints(c, demos);
  const Reproducer reproducer(model);
  const bool planar = demos.dims() == 2;

  CompareOutcome result;
  for (auto m : compared_methods(c)) {
    std::vector<Reproduction> repro;
    bool feasible = true;
    try {
      repro = reproducer.solve_many(method_weights(m, balance), constraints, SolverKind::automatic, false);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::infeasible) throw;
      feasible = false;
      result.warnings.push_back(std::string(to_string(m)) + ": infeasible (" + e.what() + ")");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < demos.size(); ++j) {
      CompareRow row{demos.labels()[j], m, std::nullopt, std::nullopt};
      if (feasible) {
        row.report = metrics::evaluate(repro[j].trajectory.samples(), demos[j].samples());
        row.reproduction = repro[j].trajectory.samples();
        total += row.report->sse;
      }
      result.rows.push_back(std::move(row));
    }
    if (feasible) result.total_sse[m] = total;
  }
  if (auto it = result.total_sse.find(Method::mccb); it != result.total_sse.end()) {
    for (const auto& [m, total] : result.total_sse) {
      if (m != Method::mccb && total < it->second) {
        result.warnings.push_back("mccb training SSE exceeds the " + std::string(to_string(m)) + " baseline");
      }
    }
  }

  // per-demo table
  std::string per_demo = "demo,method,status,sse,dtwd,frechet";
  per_demo += planar ? ",sea\n" : "\n";
  for (const auto& r : result.rows) {
    per_demo += r.demo + "," + std::string(to_string(r.method)) + ",";
    if (r.report) {
      per_demo += "ok," + io::format_number(r.report->sse) + "," + io::format_number(r.report->dtwd) + "," +
                  io::format_number(r.report->frechet);
      if (planar) per_demo += "," + detail::opt_number(r.report->sea);
    } else {
      per_demo += planar ? "infeasible,,,," : "infeasible,,,";
    }
    per_demo += "\n";
  }
  io::write_text(out / "compare_per_demo.csv", per_demo);

  // summary: one row per method and metric
  std::vector<std::string> metric_names = {"sse", "dtwd", "frechet"};
  if (planar) metric_names.emplace_back("sea");
  std::string summary = "method,metric,count,infeasible,mean,median,total\n";
  for (auto m : compared_methods(c)) {
    for (const auto& name : metric_names) {
      std::vector<double> vals;
      std::size_t infeasible = 0;
      for (const auto& r : result.rows) {
        if (r.method != m) continue;
        if (!r.report) {
          ++infeasible;
          continue;
        }
        vals.push_back(name == "sse"     ? r.report->sse
                       : name == "dtwd"  ? r.report->dtwd
                       : name == "frechet" ? r.report->frechet
                                           : r.report->sea.value_or(0.0));
      }
      summary += std::string(to_string(m)) + "," + name + "," + std::to_string(vals.size()) + "," +
                 std::to_string(infeasible) + ",";
      if (vals.empty()) {
        summary += ",,\n";
        continue;
      }
      const double total = total_of(vals);
      summary += io::format_number(total / static_cast<double>(vals.size())) + "," + detail::median_text(vals) + "," +
                 io::format_number(total) + "\n";
    }
  }
  io::write_text(out / "compare_summary.csv", summary);

  // tidy overlays: demonstrations followed by each feasible reproduction
  std::string overlays = "demo,method,t";
  for (Index i = 0; i < demos.dims(); ++i) overlays += ",x" + std::to_string(i + 1);
  overlays += "\n";
  auto emit = [&](const std::string& demo, std::string_view method, const Eigen::MatrixXd& x) {
    for (Index t = 0; t < x.rows(); ++t) {
      overlays += demo + "," + std::string(method) + "," + std::to_string(t);
      for (Index i = 0; i < x.cols(); ++i) overlays += "," + io::format_number(x(t, i));
      overlays += "\n";
    }
  };
  for (std::size_t j = 0; j < demos.size(); ++j) emit(demos.labels()[j], "demonstration", demos[j].samples());
  for (const auto& r : result.rows) {
    if (r.reproduction) emit(r.demo, to_string(r.method), *r.reproduction);
  }
  io::write_text(out / "overlays.csv", overlays);
  return result;
}

struct ReproduceRequest {
  std::string id = "new";
  std::string method = "mccb";
  std::optional<std::vector<double>> start;
  std::optional<std::vector<double>> goal;
  std::vector<ViaPoint> via;  // demo field ignored
};

/// Solves one reproduction under new constraints; writes repro_<id>.csv and repro_<id>.json.
inline Reproduction run_reproduce(const RunConfig& c, const ReproduceRequest& req) {
  const fs::path out(c.output);
  const auto model = serialize::model_from_json(read_json_file(out / "model.json"));
  const auto balance = serialize::balance_from_json(read_json_file(out / "balance.json"));
  const Index T = model.horizon();
  const Index n = model.dims();
  if (req.id.empty() || req.id.find_first_of("/\\") != std::string::npos) {
    throw config_error("reproduce", "id must be a plain file name fragment");
  }
  ConstraintSet cs(T, n);
  auto row = [&](const std::vector<double>& v, const char* what) {
    if (static_cast<Index>(v.size()) != n) {
      throw config_error("reproduce", std::string(what) + " has " + std::to_string(v.size()) + " values, expected " +
                                          std::to_string(n));
    }
    return Eigen::Map<const Eigen::RowVectorXd>(v.data(), n);
  };
  if (req.start) cs.pin(0, row(*req.start, "start"));
  if (req.goal) cs.pin(T - 1, row(*req.goal, "goal"));
  for (const auto& v : req.via) {
    if (v.t < 0 || v.t >= T) throw config_error("reproduce", "via point time index outside [0, T)");
    cs.pin(v.t, row(v.value, "via point"));
  }
  if (cs.size() == 0) throw config_error("reproduce", "no constraints given: pass --start, --goal or --via");

  const auto weights = method_weights(method_from_string(req.method), balance);
  const Reproducer reproducer(model);
  auto r = reproducer.solve(weights, cs);

  io::write_csv(out / ("repro_" + req.id + ".csv"), r.trajectory.samples());
  auto doc = serialize::to_json(r, req.id, weights);
  doc["method"] = req.method;
  json cons = json::array();
  for (const auto& cr : cs.rows()) {
    cons.push_back({{"selector", serialize::detail::vector_json(cr.selector.transpose())},
                    {"target", serialize::detail::vector_json(cr.target.transpose())}});
  }
  doc["constraints"] = cons;
  write_json_file(out / ("repro_" + req.id + ".json"), doc);
  return r;
}

/// Metrics between two trajectory files; SSE and SEA only when the lengths agree.
inline json run_metrics(const fs::path& a_file, const fs::path& b_file) {
  const auto a = io::read_csv(a_file);
  const auto b = io::read_csv(b_file);
  if (a.dims() != b.dims()) throw config_error("metrics", "trajectories have different dimensions");
  if (a.length() == b.length()) return serialize::to_json(metrics::evaluate(a, b));
  return {{"dtwd", metrics::dtwd(a.samples(), b.samples())}, {"frechet", metrics::frechet(a.samples(), b.samples())}};
}

}  // namespace pipeline
}  // namespace mccb
