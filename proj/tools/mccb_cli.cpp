// mccb: train, compare, reproduce and score point-to-point skills.
//
//   mccb train     --config run.json [--<field> value ...]
//   mccb compare   --config run.json
//   mccb reproduce --config run.json --start x,y --goal x,y [--via t:x,y ...] [--id name] [--method mccb]
//   mccb metrics   a.csv b.csv
//
// Exit codes: 0 success, 2 configuration or I/O, 3 numerical failure, 4 infeasible constraints.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mccb/mccb.hpp"

namespace {

using mccb::pipeline::RunConfig;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Flags mirroring the configuration keys; only those given on the command line override the file.
struct ConfigFlags {
  std::string config;
  std::string dataset, format, endpoint_mode, output, via_points, baselines;
  long long target_T = 0, reference = 0;
  int K = 0;
  std::uint64_t seed = 0;
  double grid_step = 0.0;
  bool align = true;
  std::vector<CLI::Option*> given;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "run configuration JSON");
    opt(cmd->add_option("--dataset", dataset, "demonstration directory or file"));
    opt(cmd->add_option("--format", format, "csv-dir | jsonl"));
    opt(cmd->add_option("--target_T", target_T, "aligned horizon (default: reference length)"));
    opt(cmd->add_option("--reference", reference, "alignment reference index (default: medoid)"));
    opt(cmd->add_option("--align", align, "DTW-align the demonstrations (true|false)"));
    opt(cmd->add_option("--K", K, "Gaussian components per coordinate"));
    opt(cmd->add_option("--seed", seed, "seed for the random EM initialization"));
    opt(cmd->add_option("--grid_step", grid_step, "alpha lattice spacing"));
    opt(cmd->add_option("--endpoint_mode", endpoint_mode, "both | start | goal | none"));
    opt(cmd->add_option("--via_points", via_points, "via points as a JSON array"));
    opt(cmd->add_option("--output", output, "output directory"));
    opt(cmd->add_option("--baselines", baselines, "comma separated baseline list"));
  }

  void opt(CLI::Option* o) { given.push_back(o); }

  [[nodiscard]] bool has(const char* name) const {
    for (const auto* o : given) {
      if (o->get_name() == name && o->count() > 0) return true;
    }
    return false;
  }

  [[nodiscard]] RunConfig resolve() const {
    RunConfig c;
    if (!config.empty()) c = mccb::pipeline::load_config(config);
    json j = json::object();
    if (has("--dataset")) j["dataset"] = dataset;
    if (has("--format")) j["format"] = format;
    if (has("--target_T")) j["target_T"] = target_T;
    if (has("--reference")) j["reference"] = reference;
    if (has("--align")) j["align"] = align;
    if (has("--K")) j["K"] = K;
    if (has("--seed")) j["seed"] = seed;
    if (has("--grid_step")) j["grid_step"] = grid_step;
    if (has("--endpoint_mode")) j["endpoint_mode"] = endpoint_mode;
    if (has("--output")) j["output"] = output;
    if (has("--via_points")) {
      try {
        j["via_points"] = json::parse(via_points);
      } catch (const json::exception& e) {
        throw mccb::config_error("config", std::string("--via_points is not valid JSON: ") + e.what());
      }
    }
    if (has("--baselines")) {
      std::vector<std::string> list;
      std::size_t start = 0;
      while (start <= baselines.size()) {
        const auto comma = baselines.find(',', start);
        const auto item = baselines.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) list.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      j["baselines"] = list;
    }
    mccb::pipeline::merge(c, j);
    return c;
  }
};

std::vector<double> parse_values(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(mccb::io::detail::parse_number(
        std::string_view(text).substr(start, comma == std::string::npos ? std::string::npos : comma - start), what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::string triple(const mccb::Simplex3& v) {
  return "cartesian=" + mccb::io::format_number(v[0]) + " tangent=" + mccb::io::format_number(v[1]) +
         " laplacian=" + mccb::io::format_number(v[2]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-coordinate cost balancing for point-to-point skills"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mccb::kLibraryVersion);

  ConfigFlags train_flags;
  auto* train = app.add_subcommand("train", "align, fit the three coordinate models and balance the weights");
  train_flags.attach(train);

  ConfigFlags compare_flags;
  auto* compare = app.add_subcommand("compare", "evaluate the baselines and MCCB on every demonstration");
  compare_flags.attach(compare);

  ConfigFlags repro_flags;
  mccb::pipeline::ReproduceRequest request;
  std::string start, goal;
  std::vector<std::string> via;
  auto* reproduce = app.add_subcommand("reproduce", "reproduce the skill under new constraints");
  repro_flags.attach(reproduce);
  reproduce->add_option("--start", start, "initial point, comma separated");
  reproduce->add_option("--goal", goal, "final point, comma separated");
  reproduce->add_option("--via", via, "via point as t:x1,x2,... (repeatable)");
  reproduce->add_option("--id", request.id, "name used in repro_<id>.csv")->capture_default_str();
  reproduce->add_option("--method", request.method, "cartesian | tangent | laplacian | uniform | mccb")
      ->capture_default_str();

  std::string metric_a, metric_b;
  auto* metrics = app.add_subcommand("metrics", "SSE, DTWD, Frechet and SEA between two CSV trajectories");
  metrics->add_option("a", metric_a, "first trajectory")->required();
  metrics->add_option("b", metric_b, "second trajectory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (train->parsed()) {
      const auto cfg = train_flags.resolve();
      const auto out = mccb::pipeline::run_train(cfg);
      print_warnings(out.warnings);
      std::cout << "alpha   " << triple(out.balance.alpha) << "\n"
                << "beta    " << triple(out.balance.beta) << "\n"
                << "weights "
                << triple({out.balance.weights.cartesian, out.balance.weights.tangent, out.balance.weights.laplacian})
                << "\n"
                << "training SSE " << mccb::io::format_number(out.balance.total_sse) << "\n"
                << "wrote " << cfg.output << "/{model,balance,manifest}.json\n";
    } else if (compare->parsed()) {
      const auto cfg = compare_flags.resolve();
      const auto out = mccb::pipeline::run_compare(cfg);
      print_warnings(out.warnings);
      for (const auto& [m, total] : out.total_sse) {
        std::cout << mccb::to_string(m) << " total SSE " << mccb::io::format_number(total) << "\n";
      }
      std::cout << "wrote " << cfg.output << "/compare_per_demo.csv, compare_summary.csv, overlays.csv\n";
    } else if (reproduce->parsed()) {
      const auto cfg = repro_flags.resolve();
      if (!start.empty()) request.start = parse_values(start, "--start");
      if (!goal.empty()) request.goal = parse_values(goal, "--goal");
      for (const auto& v : via) {
        const auto colon = v.find(':');
        if (colon == std::string::npos) throw mccb::config_error("cli", "--via expects t:x1,x2,...");
        mccb::pipeline::ViaPoint p;
        const double t = mccb::io::detail::parse_number(v.substr(0, colon), "--via");
        if (t != std::floor(t)) throw mccb::config_error("cli", "--via time index must be an integer");
        p.t = static_cast<mccb::Index>(t);
        p.value = parse_values(v.substr(colon + 1), "--via");
        request.via.push_back(std::move(p));
      }
      const auto r = mccb::pipeline::run_reproduce(cfg, request);
      std::cout << "constraint residual " << mccb::io::format_number(r.constraint_residual) << "\n"
                << "wrote " << cfg.output << "/repro_" << request.id << ".csv\n";
    } else if (metrics->parsed()) {
      std::cout << mccb::pipeline::run_metrics(metric_a, metric_b).dump(2) << "\n";
    }
  } catch (const mccb::Error& e) {
    std::cerr << "error [" << e.module() << "]: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [io]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
