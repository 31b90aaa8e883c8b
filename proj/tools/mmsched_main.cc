#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmsched/env_server.h"
#include "mmsched/error.h"
#include "mmsched/experiment.h"
#include "mmsched/net_gen.h"
#include "mmsched/network_io.h"
#include "mmsched/path_select.h"
#include "mmsched/rate_opt.h"

namespace fs = std::filesystem;
using namespace mmsched;

namespace {

constexpr int kExitInfeasible = 2;

std::string short_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<Path> load_or_enumerate(const Network& network, const std::string& paths_file) {
  if (!paths_file.empty()) return load_paths(paths_file);
  PathEnumeration all = enumerate_paths(network);
  if (all.truncated) {
    std::cerr << "warning: path enumeration stopped at " << all.paths.size() << " paths\n";
  }
  return std::move(all.paths);
}

RateObjective parse_objective(const std::string& text) {
  RateObjective obj;
  auto number_after = [&text](std::size_t colon) {
    const std::string tail = text.substr(colon + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size()) {
      throw Error(ErrorCode::kConfig, "bad number in objective '" + text + "'");
    }
    return v;
  };
  if (text == "capacity") {
    obj.kind = ObjectiveKind::kApproxCapacity;
  } else if (text == "average") {
    obj.kind = ObjectiveKind::kAverage;
  } else if (text.starts_with("worst:")) {
    obj.kind = ObjectiveKind::kWorstCase;
    const double k = number_after(5);
    if (k < 0 || k != static_cast<int>(k)) {
      throw Error(ErrorCode::kConfig, "worst:k needs a nonnegative integer k");
    }
    obj.blocked_links = static_cast<int>(k);
  } else if (text.starts_with("feasible:")) {
    obj.kind = ObjectiveKind::kFeasibility;
    obj.target_rate = number_after(8);
  } else {
    throw Error(ErrorCode::kConfig,
                "objective must be capacity, worst:k, average or feasible:R, got '" + text + "'");
  }
  return obj;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::string& digest_source, std::optional<std::uint64_t> seed,
                    std::vector<std::string> outputs) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["config_digest"] = "fnv1a64:" + fnv1a_digest(digest_source);
  m["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json();
  m["version"] = kToolkitVersion;
  std::sort(outputs.begin(), outputs.end());
  m["outputs"] = outputs;
  write_file(out_dir / "manifest.json", m.dump(2) + "\n");
}

int cmd_solve(const std::string& network_file, const std::string& paths_file,
              const std::string& objective_text, std::optional<int> k,
              const std::string& out_dir) {
  const Network network = load_network(network_file);
  const std::vector<Path> paths = load_or_enumerate(network, paths_file);
  std::string text = objective_text;
  if (text == "worst" && k) text = "worst:" + std::to_string(*k);
  const RateObjective objective = parse_objective(text);
  const RateSolution sol = solve_rate_problem(network, paths, objective);

  std::cout << "objective: " << text << "\n";
  std::cout << "status: " << lp_status_name(sol.status) << "\n";
  if (!sol.optimal()) {
    std::cout << "infeasible\n";
    return kExitInfeasible;
  }
  std::cout << "value: " << short_double(sol.value) << " (" << format_double(sol.value) << ")\n";
  double rate = 0.0;
  for (const ScheduleEntry& e : sol.schedule) rate += e.activation * path_capacity(network, e.path);
  std::cout << "rate: " << format_double(rate) << "\n";
  std::cout << "path_id,path,x_p\n";
  for (std::size_t i : sol.active()) {
    std::cout << i << "," << sol.schedule[i].path.to_string() << ","
              << format_double(sol.schedule[i].activation) << "\n";
  }
  if (sol.worst_pattern) {
    std::cout << "worst_pattern:";
    for (LinkId id : *sol.worst_pattern) {
      std::cout << " " << network.link(id).src << "->" << network.link(id).dst;
    }
    std::cout << "\n";
  }
  if (!out_dir.empty()) {
    std::ostringstream csv;
    write_schedule_csv(csv, sol.schedule);
    write_file(fs::path(out_dir) / "schedule.csv", csv.str());
    write_file(fs::path(out_dir) / "paths.json", paths_to_string(paths));
    write_manifest(out_dir, "solve " + text, read_file(network_file) + text, std::nullopt,
                   {"schedule.csv", "paths.json"});
  }
  return 0;
}

int cmd_tradeoff(const std::string& network_file, const std::string& paths_file, int k_max,
                 const std::string& out_dir) {
  const Network network = load_network(network_file);
  const std::vector<Path> paths = load_or_enumerate(network, paths_file);
  const std::vector<TradeoffPoint> curve = tradeoff_curve(network, paths, k_max);
  std::ostringstream csv;
  csv << "k_star,k,rate\n";
  for (const TradeoffPoint& p : curve) {
    csv << p.design_failures << "," << p.failures << "," << format_double(p.rate) << "\n";
  }
  std::cout << csv.str();
  if (!out_dir.empty()) {
    write_file(fs::path(out_dir) / "tradeoff.csv", csv.str());
    write_manifest(out_dir, "tradeoff", read_file(network_file) + std::to_string(k_max),
                   std::nullopt, {"tradeoff.csv"});
  }
  return 0;
}

int cmd_select(const std::string& network_file, std::size_t min_k, const std::string& out_dir) {
  const Network network = load_network(network_file);
  const std::vector<Path> selected = select_paths(network);
  const std::vector<Network> variants{network};
  CandidateOptions options;
  options.min_paths = min_k;
  const PathEnumeration all = enumerate_paths(network);
  const CandidatePaths candidates = build_candidate_paths(variants, options, all.paths);

  std::cout << "selected " << selected.size() << "\n";
  for (const Path& p : selected) std::cout << p.to_string() << "\n";
  std::cout << "candidates " << candidates.paths.size()
            << (candidates.shortfall ? " shortfall" : "") << "\n";
  for (const Path& p : candidates.paths) std::cout << p.to_string() << "\n";
  if (!out_dir.empty()) {
    write_file(fs::path(out_dir) / "selected.json", paths_to_string(selected));
    write_file(fs::path(out_dir) / "candidates.json", paths_to_string(candidates.paths));
    write_manifest(out_dir, "select", read_file(network_file) + std::to_string(min_k),
                   std::nullopt, {"selected.json", "candidates.json"});
  }
  return 0;
}

int cmd_generate(const std::string& config_file, std::uint64_t seed, const std::string& out_dir) {
  const ExperimentConfig config =
      config_file.empty() ? ExperimentConfig{} : load_experiment_config(config_file);
  GenConfig gen = config.generator;
  gen.seed = seed;
  const GeneratedNetwork g = generate_topology(gen);
  const std::vector<double> lambda =
      sample_lambdas(g.network, gen.lambda_min, gen.lambda_max, derive_seed(seed, "lambda", 0));
  const Network network = assign_blockage(g.network, lambda, gen.tau_b);
  if (g.path_count_warning) {
    std::cerr << "warning: only " << g.path_count << " paths, wanted " << gen.min_path_count
              << "\n";
  }
  std::cout << "relays " << network.relay_count() << "\nlinks " << network.link_count()
            << "\npaths " << g.path_count << "\nreference_snr " << format_double(g.reference_snr)
            << "\n";
  if (!out_dir.empty()) {
    write_file(fs::path(out_dir) / "network.json", network_to_string(network));
    write_manifest(out_dir, "generate", experiment_config_to_string(config), seed,
                   {"network.json"});
  } else {
    std::cout << network_to_string(network);
  }
  return 0;
}

int cmd_experiment(const std::string& config_file, std::uint64_t seed, const std::string& out_dir) {
  const ExperimentConfig config = load_experiment_config(config_file);
  const ExperimentResult result = run_experiment(config, seed, out_dir);
  std::cout << "instance,paths,approx_capacity,r_star,pk_size,pk_shortfall\n";
  for (const InstanceSummary& s : result.instances) {
    std::cout << s.index << "," << s.path_count << "," << format_double(s.approx_capacity)
              << "," << format_double(s.r_star) << "," << s.pk_size << ","
              << (s.pk_shortfall ? 1 : 0) << "\n";
  }
  return 0;
}

int cmd_serve(const std::string& config_file, const std::string& endpoint_text) {
  const Endpoint endpoint = parse_endpoint(endpoint_text);
  const EnvSetup setup = load_env_setup(config_file);
  EnvFactory factory = [&setup] {
    return std::make_unique<SchedulingEnv>(setup.env, setup.reselector);
  };
  if (!endpoint.tcp) {
    serve_stream(std::cin, std::cout, factory);
    return 0;
  }
  TcpServer server(endpoint.host, endpoint.port, factory);
  std::cerr << "listening on " << endpoint.host << ":" << server.port() << "\n";
  server.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path selection and rate scheduling for blockage-prone relay networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolkitVersion));

  std::string network_file;
  std::string paths_file;
  std::string objective = "capacity";
  std::optional<int> k;
  std::string out_dir;
  std::string config_file;
  std::uint64_t seed = 0;
  std::string endpoint = "stdio";
  std::size_t min_k = 10;

  auto* solve = app.add_subcommand("solve", "Solve a rate-optimization LP");
  solve->add_option("--network", network_file, "Network file")->required();
  solve->add_option("--paths", paths_file, "Path list file (default: all simple paths)");
  solve->add_option("--objective", objective, "capacity | worst:k | average | feasible:R");
  solve->add_option("--k", k, "Blocked links when --objective is 'worst'");
  solve->add_option("--out-dir", out_dir, "Write schedule.csv and a manifest here");

  int k_max = 0;
  auto* tradeoff = app.add_subcommand("tradeoff", "Worst-case rate table over design and actual failures");
  tradeoff->add_option("--network", network_file, "Network file")->required();
  tradeoff->add_option("--paths", paths_file, "Path list file (default: all simple paths)");
  tradeoff->add_option("--k", k_max, "Largest failure count")->required();
  tradeoff->add_option("--out-dir", out_dir, "Write tradeoff.csv and a manifest here");

  auto* select = app.add_subcommand("select", "Greedy path selection and candidate set");
  select->add_option("--network", network_file, "Network file")->required();
  select->add_option("--k", min_k, "Minimum candidate set size");
  select->add_option("--out-dir", out_dir, "Write path lists and a manifest here");

  auto* generate = app.add_subcommand("generate", "Generate a random network");
  generate->add_option("--config", config_file, "Experiment config (generator section used)");
  generate->add_option("--seed", seed, "Random seed")->required();
  generate->add_option("--out-dir", out_dir, "Write network.json and a manifest here");

  auto* experiment = app.add_subcommand("experiment", "Generate instances and run the baselines");
  experiment->add_option("--config", config_file, "Experiment config")->required();
  experiment->add_option("--seed", seed, "Random seed")->required();
  experiment->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* serve = app.add_subcommand("serve", "Serve the scheduling environment");
  serve->add_option("--config", config_file, "Environment document")->required();
  serve->add_option("--endpoint", endpoint, "stdio or tcp:host:port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(network_file, paths_file, objective, k, out_dir);
    if (*tradeoff) return cmd_tradeoff(network_file, paths_file, k_max, out_dir);
    if (*select) return cmd_select(network_file, min_k, out_dir);
    if (*generate) return cmd_generate(config_file, seed, out_dir);
    if (*experiment) return cmd_experiment(config_file, seed, out_dir);
    if (*serve) return cmd_serve(config_file, endpoint);
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
