#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmsched/lp.h"
#include "mmsched/network.h"

namespace mmsched {

enum class ObjectiveKind { kApproxCapacity, kWorstCase, kAverage, kFeasibility };

struct RateObjective {
  ObjectiveKind kind = ObjectiveKind::kApproxCapacity;
  // Number of blocked links for kWorstCase.
  int blocked_links = 0;
  // Target R* for kFeasibility.
  double target_rate = 0.0;
};

struct RateOptions {
  // Refuse worst-case problems whose blockage pattern set is larger.
  std::size_t pattern_cap = 200'000;
  const LpSolver* solver = nullptr;  // default_lp_solver() when null
};

struct RateSolution {
  LpStatus status = LpStatus::kOptimal;
  double value = 0.0;
  // One entry per input path, in input order.
  Schedule schedule;
  // Worst case only: a blockage pattern that attains the optimum.
  std::optional<std::vector<LinkId>> worst_pattern;

  bool optimal() const { return status == LpStatus::kOptimal; }
  // Entries with activation above the threshold.
  std::vector<std::size_t> active(double threshold = 1e-9) const;
};

RateSolution approx_capacity(const Network& network, std::span<const Path> paths,
                             const RateOptions& options = {});

// max over schedules of the min, over every set of k blocked links, of the
// delivered rate. Throws Error(kBudgetExceeded) past options.pattern_cap.
RateSolution optimal_worst_case(const Network& network, std::span<const Path> paths,
                                int blocked_links, const RateOptions& options = {});

// Maximizes sum_p x_p C_p S_p.
RateSolution optimal_average(const Network& network, std::span<const Path> paths,
                             const RateOptions& options = {});

// Average rate obtained by the plain capacity-optimal schedule.
double plain_lp_average_rate(const Network& network, std::span<const Path> paths,
                             const RateOptions& options = {});

// Any schedule with sum_p x_p C_p == target; status kInfeasible if none.
RateSolution feasibility_schedule(const Network& network, std::span<const Path> paths,
                                  double target_rate, const RateOptions& options = {});

RateSolution solve_rate_problem(const Network& network, std::span<const Path> paths,
                                const RateObjective& objective,
                                const RateOptions& options = {});

// Minimum delivered rate of a fixed schedule over every set of `blocked_links`
// blocked links.
double worst_case_rate(const Network& network, const Schedule& schedule, int blocked_links,
                       std::size_t pattern_cap = 200'000);

struct TradeoffPoint {
  int design_failures = 0;  // k* used to pick the schedule
  int failures = 0;         // k actually blocked
  double rate = 0.0;
};

// Rows for every k* in [0, max_failures] and k in [0, max_failures].
std::vector<TradeoffPoint> tradeoff_curve(const Network& network, std::span<const Path> paths,
                                          int max_failures, const RateOptions& options = {});

struct EdgeDisjointSolution {
  std::vector<Path> paths;
  // Over `paths` only.
  Schedule schedule;
  double worst_case_rate = 0.0;
  // True when the worst-case LP already used only edge-disjoint paths.
  bool from_lp = false;
};

// Equal-capacity networks only (Error(kPrecondition) otherwise). Solves the
// worst-case LP and, if its active paths overlap, rebuilds an edge-disjoint
// schedule with the same worst-case rate. The path set defaults to every
// simple path of the network.
EdgeDisjointSolution edge_disjoint_worst_case(const Network& network, int blocked_links,
                                              const RateOptions& options = {});
EdgeDisjointSolution edge_disjoint_worst_case(const Network& network,
                                              std::span<const Path> paths, int blocked_links,
                                              const RateOptions& options = {});

struct RateMoments {
  double mean = 0.0;
  double variance = 0.0;
  bool exhaustive = false;
};

struct MomentOptions {
  // Exhaustive enumeration when at most this many links matter.
  std::size_t exhaustive_link_limit = 20;
  std::size_t monte_carlo_samples = 1'000'000;
  std::uint64_t seed = 1;
};

// Mean and variance of the delivered rate under independent link blockages.
RateMoments rate_moments(const Network& network, const Schedule& schedule,
                         const MomentOptions& options = {});

}  // namespace mmsched
