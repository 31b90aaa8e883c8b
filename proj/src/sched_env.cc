#include "mmsched/sched_env.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "mmsched/error.h"
#include "mmsched/net_gen.h"
#include "mmsched/network_io.h"

namespace mmsched {

void EnvConfig::validate() const {
  if (horizon < 1) throw Error(ErrorCode::kConfig, "horizon must be >= 1");
  if (epoch_length < 1) throw Error(ErrorCode::kConfig, "epoch_length must be >= 1");
  if (paths.empty()) throw Error(ErrorCode::kConfig, "at least one path is required");
  if (!std::isfinite(r_star) || r_star < 0.0) {
    throw Error(ErrorCode::kConfig, "r_star must be finite and >= 0");
  }
  if (!(capacity_stddev >= 0.0)) throw Error(ErrorCode::kConfig, "capacity_stddev must be >= 0");
  if (reselect_patience < 1) throw Error(ErrorCode::kConfig, "reselect_patience must be >= 1");
  if (r_star_fraction && !(*r_star_fraction > 0.0 && *r_star_fraction <= 1.0)) {
    throw Error(ErrorCode::kConfig, "r_star_fraction must lie in (0, 1]");
  }
  for (const Path& p : paths) {
    try {
      path_links(network, p);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, std::string("env path rejected: ") + e.what());
    }
  }
  const double r_max = approx_capacity(network, paths).value;
  if (!(kappa >= std::exp(r_max))) {
    throw Error(ErrorCode::kConfig, "kappa must be at least e^R_max = " +
                                        format_double(std::exp(r_max)));
  }
}

std::vector<PathInfo> describe_paths(const Network& network, std::span<const Path> paths) {
  std::vector<PathInfo> out;
  out.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    PathInfo info;
    info.id = static_cast<int>(i);
    info.path = paths[i];
    info.capacity = path_capacity(network, paths[i]);
    info.success_prob = path_success(network, paths[i]);
    out.push_back(std::move(info));
  }
  return out;
}

SchedulingEnv::SchedulingEnv(EnvConfig config, Reselector reselector)
    : config_(std::move(config)), reselector_(std::move(reselector)) {
  config_.validate();
  paths_ = config_.paths;
  for (const Path& p : paths_) path_link_ids_.push_back(path_links(config_.network, p));
}

EpisodeConditions SchedulingEnv::conditions(int episode) const {
  if (episode < 0) throw Error(ErrorCode::kPrecondition, "episode must be >= 0");
  EpisodeConditions c;
  c.episode = episode;
  c.epoch = episode / config_.epoch_length;
  c.blockage = sample_blockage(config_.network,
                               derive_seed(config_.seed, "blockage",
                                           static_cast<std::uint64_t>(c.epoch)));
  c.network = config_.network;
  c.r_star = config_.r_star;
  if (config_.time_varying) {
    c.network = resample_capacities(
        config_.network, derive_seed(config_.seed, "capacity", static_cast<std::uint64_t>(episode)),
        config_.capacity_stddev);
    if (config_.r_star_fraction) {
      const std::vector<Path>& basis =
          config_.capacity_paths.empty() ? config_.paths : config_.capacity_paths;
      c.r_star = *config_.r_star_fraction * approx_capacity(c.network, basis).value;
    }
  }
  return c;
}

const EpisodeConditions& SchedulingEnv::current() const {
  if (!current_) throw Error(ErrorCode::kOrdering, "no episode has been reset");
  return *current_;
}

ResetResult SchedulingEnv::reset_result() const {
  ResetResult r;
  r.state = state_;
  r.paths = describe_paths(config_.network, paths_);
  r.r_star = current_->r_star;
  r.horizon = config_.horizon;
  return r;
}

ResetResult SchedulingEnv::reset(int episode) {
  EpisodeConditions c = conditions(episode);
  effective_capacity_.assign(c.network.link_count(), 0.0);
  for (std::size_t e = 0; e < effective_capacity_.size(); ++e) {
    const auto id = static_cast<LinkId>(e);
    if (!c.blockage.is_blocked(id)) effective_capacity_[e] = c.network.link(id).capacity;
  }
  current_ = std::move(c);
  state_.assign(paths_.size(), 0.0);
  t_ = 0;
  done_ = false;
  return reset_result();
}

bool SchedulingEnv::is_valid(std::span<const double> rates) const {
  if (!current_ || rates.size() != paths_.size()) return false;
  const auto n = static_cast<std::size_t>(config_.network.node_count());
  std::vector<double> tx(n, 0.0);
  std::vector<double> rx(n, 0.0);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double r = rates[i];
    if (!std::isfinite(r) || r < 0.0) return false;
    if (r == 0.0) continue;
    for (LinkId id : path_link_ids_[i]) {
      const double cap = effective_capacity_[static_cast<std::size_t>(id)];
      if (cap <= 0.0) return false;
      const Link& l = config_.network.link(id);
      tx[static_cast<std::size_t>(l.src)] += r / cap;
      rx[static_cast<std::size_t>(l.dst)] += r / cap;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (tx[v] > 1.0 + kFeasibilityTol || rx[v] > 1.0 + kFeasibilityTol) return false;
  }
  return true;
}

StepOutcome SchedulingEnv::step(std::span<const double> action) {
  if (!current_) throw Error(ErrorCode::kOrdering, "step before reset");
  if (done_) throw Error(ErrorCode::kOrdering, "step after the episode ended");
  if (action.size() != paths_.size()) {
    throw Error(ErrorCode::kMalformedAction,
                "action has " + std::to_string(action.size()) + " entries, expected " +
                    std::to_string(paths_.size()));
  }
  for (double a : action) {
    if (!std::isfinite(a)) throw Error(ErrorCode::kMalformedAction, "action is not finite");
  }
  std::vector<double> candidate(state_);
  for (std::size_t i = 0; i < candidate.size(); ++i) candidate[i] += action[i];

  StepOutcome out;
  out.accepted = is_valid(candidate);
  if (out.accepted) state_ = std::move(candidate);
  ++t_;
  out.delivered_rate = std::accumulate(state_.begin(), state_.end(), 0.0);
  if (out.delivered_rate >= current_->r_star) {
    out.reward = 1.0;
    out.done = true;
  } else {
    out.reward = std::exp(out.delivered_rate) / config_.kappa;
    out.done = t_ >= config_.horizon;
  }
  done_ = out.done;
  out.state = state_;
  return out;
}

ResetResult SchedulingEnv::reselect() {
  if (!current_) throw Error(ErrorCode::kOrdering, "reselect before reset");
  if (!reselector_) throw Error(ErrorCode::kPrecondition, "no path reselection configured");
  std::vector<Path> fresh = reselector_(config_.network, current_->episode, reselections_);
  ++reselections_;
  if (fresh.empty()) throw Error(ErrorCode::kPrecondition, "reselection produced no paths");
  std::vector<std::vector<LinkId>> ids;
  for (const Path& p : fresh) ids.push_back(path_links(config_.network, p));
  paths_ = std::move(fresh);
  path_link_ids_ = std::move(ids);
  state_.assign(paths_.size(), 0.0);
  t_ = 0;
  done_ = false;
  return reset_result();
}

double SchedulingEnv::pct_paths_blocked() const {
  const EpisodeConditions& c = current();
  std::size_t blocked = 0;
  for (const auto& ids : path_link_ids_) {
    if (c.blockage.blocks_any(ids)) ++blocked;
  }
  return 100.0 * static_cast<double>(blocked) / static_cast<double>(path_link_ids_.size());
}

std::vector<double> run_baseline_static(const SchedulingEnv& env, const Schedule& schedule,
                                        int episodes) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  for (int e = 0; e < episodes; ++e) {
    const EpisodeConditions c = env.conditions(e);
    out.push_back(delivered_rate(c.network, schedule, c.blockage));
  }
  return out;
}

PathPick pick_hc_paths(const Network& network, std::span<const Path> all_paths, std::size_t k,
                       const RateOptions& options) {
  if (k < 1) throw Error(ErrorCode::kPrecondition, "k must be >= 1");
  const RateSolution sol = approx_capacity(network, all_paths, options);
  std::vector<std::size_t> active = sol.active();
  std::stable_sort(active.begin(), active.end(), [&sol](std::size_t a, std::size_t b) {
    return sol.schedule[a].activation > sol.schedule[b].activation;
  });
  PathPick pick;
  for (std::size_t i = 0; i < active.size() && i < k; ++i) pick.paths.push_back(all_paths[active[i]]);
  pick.shortfall = pick.paths.size() < k;
  return pick;
}

PathPick pick_rs_paths(std::span<const Path> all_paths, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::kPrecondition, "k must be >= 1");
  PathPick pick;
  std::mt19937_64 rng(seed);
  std::sample(all_paths.begin(), all_paths.end(), std::back_inserter(pick.paths), k, rng);
  pick.shortfall = pick.paths.size() < k;
  return pick;
}

double avg_training_rate(std::span<const double> step_rates, int horizon) {
  if (step_rates.empty()) throw Error(ErrorCode::kPrecondition, "empty episode trace");
  if (horizon < 1 || step_rates.size() > static_cast<std::size_t>(horizon)) {
    throw Error(ErrorCode::kPrecondition, "trace is longer than the horizon");
  }
  const double sum = std::accumulate(step_rates.begin(), step_rates.end(), 0.0);
  const auto padding = static_cast<double>(static_cast<std::size_t>(horizon) - step_rates.size());
  return (sum + padding * step_rates.back()) / static_cast<double>(horizon);
}

double evaluation_rollup(std::span<const double> final_rates) {
  if (final_rates.empty()) throw Error(ErrorCode::kPrecondition, "no evaluation rollouts");
  return std::accumulate(final_rates.begin(), final_rates.end(), 0.0) /
         static_cast<double>(final_rates.size());
}

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows) {
  out << "episode,avg_training_rate,evaluation_rate,r_star,pct_paths_blocked\n";
  for (const MetricRow& r : rows) {
    out << r.episode << ',' << format_double(r.avg_training_rate) << ','
        << format_double(r.evaluation_rate) << ',' << format_double(r.r_star) << ','
        << format_double(r.pct_paths_blocked) << '\n';
  }
}

}  // namespace mmsched
