#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mmsched/net_gen.h"
#include "mmsched/sched_env.h"

namespace mmsched {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

// Everything an experiment run needs. Parsed from a JSON document whose
// sections mirror the fields below; omitted fields keep these defaults.
struct ExperimentConfig {
  GenConfig generator;  // its seed is derived per instance
  int instances = 5;
  int threads = 0;  // 0: one per hardware thread

  int episodes = 200;
  int horizon = 500;
  int epoch_length = 10;
  double r_star_fraction = 0.7;
  double kappa = 1e7;
  int reselect_patience = 2500;
  bool time_varying = false;
  double capacity_stddev = 1.0;

  std::size_t min_k = 10;
  int lambda_sets = 5;
  std::size_t max_paths = kDefaultMaxPaths;

  // Passed through to the agent.
  double epsilon = 0.01;
  int evaluation_rollouts = 5;

  void validate() const;
};

// Throws Error(kConfig) on unknown keys or wrong types and Error(kParse) on
// malformed JSON.
ExperimentConfig parse_experiment_config(std::string_view text,
                                         std::string_view source_name = "<config>");
ExperimentConfig load_experiment_config(const std::filesystem::path& file);
// Canonical form with every field spelled out.
std::string experiment_config_to_string(const ExperimentConfig& config);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_digest(std::string_view bytes);

struct InstanceSummary {
  int index = 0;
  std::uint64_t seed = 0;
  std::size_t link_count = 0;
  std::size_t path_count = 0;
  bool paths_truncated = false;
  bool path_count_warning = false;
  double approx_capacity = 0.0;
  double r_star = 0.0;
  std::size_t pk_size = 0;
  bool pk_shortfall = false;
  bool hc_shortfall = false;
  bool rs_shortfall = false;
};

struct ExperimentResult {
  std::vector<InstanceSummary> instances;
  // Relative to the output directory, sorted.
  std::vector<std::string> outputs;
  std::string config_digest;
};

// Generates every instance, builds the three agent path sets, evaluates the
// two static-schedule baselines and writes everything plus manifest.json
// under out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                                const std::filesystem::path& out_dir);

struct ReselectSettings {
  int lambda_sets = 5;
  std::size_t min_k = 10;
  double lambda_min = 200.0;
  double lambda_max = 600.0;
  double tau_b = 5e-5;
};

// Path reselection that redraws lambda sets and reruns candidate building.
Reselector make_reselector(ReselectSettings settings, std::uint64_t seed, bool time_varying,
                           double capacity_stddev);

struct EnvSetup {
  EnvConfig env;
  Reselector reselector;  // empty when the document has no "reselect" section
};

// Environment document used by `serve`. File references are relative to the
// document's directory.
EnvSetup load_env_setup(const std::filesystem::path& file);

}  // namespace mmsched
