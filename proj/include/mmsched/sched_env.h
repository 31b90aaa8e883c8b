#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mmsched/network.h"
#include "mmsched/rate_opt.h"

namespace mmsched {

struct EnvConfig {
  // Static network: nominal capacities and blockage probabilities.
  Network network;
  std::vector<Path> paths;
  double r_star = 0.0;
  int horizon = 500;
  double kappa = 1e7;
  int epoch_length = 10;
  bool time_varying = false;
  double capacity_stddev = 1.0;
  // Reward-starved steps after which the agent should ask for reselection.
  int reselect_patience = 2500;
  std::uint64_t seed = 0;
  // Time-varying mode only: when set, R* is this fraction of the approximate
  // capacity of each episode's resampled network over capacity_paths.
  std::optional<double> r_star_fraction;
  std::vector<Path> capacity_paths;

  // Throws Error(kConfig) when an invariant fails, including kappa < e^{R_max}.
  void validate() const;
};

struct PathInfo {
  int id = 0;
  Path path;
  double capacity = 0.0;      // nominal bottleneck
  double success_prob = 0.0;  // probability no link is blocked
};

struct ResetResult {
  std::vector<double> state;
  std::vector<PathInfo> paths;
  double r_star = 0.0;
  int horizon = 0;
};

struct StepOutcome {
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;
  bool accepted = false;
  double delivered_rate = 0.0;
};

// Network state seen during one episode.
struct EpisodeConditions {
  int episode = 0;
  int epoch = 0;
  // Capacities of this episode; blockage probabilities of the static network.
  Network network;
  BlockageRealization blockage;
  double r_star = 0.0;
};

// Supplies a new path set on request. Receives the static network, the
// current episode and the number of earlier reselections.
using Reselector =
    std::function<std::vector<Path>(const Network& network, int episode, int count)>;

std::vector<PathInfo> describe_paths(const Network& network, std::span<const Path> paths);

// Path-rate scheduling as a Markov decision process. The state holds the
// requested rate of every path; an action is added to it when the result
// still satisfies the half-duplex beam constraints with blocked links at zero
// capacity, and ignored otherwise.
class SchedulingEnv {
 public:
  explicit SchedulingEnv(EnvConfig config, Reselector reselector = {});

  const EnvConfig& config() const { return config_; }
  const std::vector<Path>& paths() const { return paths_; }
  std::size_t path_count() const { return paths_.size(); }
  // Pure function of the configuration and the episode index.
  EpisodeConditions conditions(int episode) const;

  ResetResult reset(int episode);
  // Throws Error(kOrdering) before reset or after the episode ended and
  // Error(kMalformedAction) on a wrong length or non-finite entries.
  StepOutcome step(std::span<const double> action);
  bool is_valid(std::span<const double> rates) const;
  // Replaces the path set and restarts the current episode from the zero
  // state. Throws Error(kOrdering) before the first reset and
  // Error(kPrecondition) without a reselector.
  ResetResult reselect();

  bool started() const { return current_.has_value(); }
  bool done() const { return done_; }
  int time_step() const { return t_; }
  const std::vector<double>& state() const { return state_; }
  const EpisodeConditions& current() const;
  // Percentage of env paths crossing a blocked link in the current episode.
  double pct_paths_blocked() const;

 private:
  ResetResult reset_result() const;

  EnvConfig config_;
  Reselector reselector_;
  std::vector<Path> paths_;
  std::vector<std::vector<LinkId>> path_link_ids_;
  std::optional<EpisodeConditions> current_;
  std::vector<double> effective_capacity_;
  std::vector<double> state_;
  int t_ = 0;
  bool done_ = false;
  int reselections_ = 0;
};

// Delivered rate of a fixed schedule in each of the first `episodes` episodes.
// Blocked paths keep their airtime and deliver nothing.
std::vector<double> run_baseline_static(const SchedulingEnv& env, const Schedule& schedule,
                                        int episodes);

struct PathPick {
  std::vector<Path> paths;
  bool shortfall = false;
};

// Active paths of the approximate-capacity schedule by activation, largest first.
PathPick pick_hc_paths(const Network& network, std::span<const Path> all_paths, std::size_t k,
                       const RateOptions& options = {});
// Uniform sample without replacement, in input order.
PathPick pick_rs_paths(std::span<const Path> all_paths, std::size_t k, std::uint64_t seed);

// Mean over `horizon` steps of the per-step delivered rate, repeating the last
// entry for steps after an early end. Throws Error(kPrecondition) when empty.
double avg_training_rate(std::span<const double> step_rates, int horizon);
// Mean of the final rates of the evaluation rollouts.
double evaluation_rollup(std::span<const double> final_rates);

struct MetricRow {
  int episode = 0;
  double avg_training_rate = 0.0;
  double evaluation_rate = 0.0;
  double r_star = 0.0;
  double pct_paths_blocked = 0.0;
};

// Header "episode,avg_training_rate,evaluation_rate,r_star,pct_paths_blocked".
void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows);

}  // namespace mmsched
