#include "mmsched/rate_opt.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mmsched/error.h"

namespace mmsched {

std::vector<std::size_t> RateSolution::active(double threshold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].activation > threshold) out.push_back(i);
  }
  return out;
}

namespace {

constexpr double kActiveThreshold = 1e-9;

const LpSolver& solver_of(const RateOptions& options) {
  return options.solver ? *options.solver : default_lp_solver();
}

struct PathInfo {
  std::vector<LinkId> links;
  double capacity = 0.0;
  double success = 1.0;
};

// Per-path data plus the LP column of every path that can carry traffic.
// Paths through a zero-capacity link deliver nothing and get no column.
struct PathTable {
  std::vector<PathInfo> info;
  std::vector<int> column;        // -1 for unusable paths
  std::vector<std::size_t> usable;  // column -> path index

  PathTable(const Network& network, std::span<const Path> paths) {
    info.reserve(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      PathInfo p;
      p.links = path_links(network, paths[i]);
      p.capacity = std::numeric_limits<double>::infinity();
      for (LinkId id : p.links) {
        p.capacity = std::min(p.capacity, network.link(id).capacity);
        p.success *= 1.0 - network.link(id).block_prob;
      }
      if (p.capacity > 0.0) {
        column.push_back(static_cast<int>(usable.size()));
        usable.push_back(i);
      } else {
        column.push_back(-1);
      }
      info.push_back(std::move(p));
    }
  }

  std::size_t columns() const { return usable.size(); }
};

// The 2N+2 node rows: every node transmits (nodes 0..N) and receives (nodes
// 1..N+1) for at most the whole time. `extra` trailing columns stay zero.
LinearProgram node_constrained_lp(const Network& network, const PathTable& table,
                                  std::size_t extra) {
  const std::size_t vars = table.columns() + extra;
  const auto relays = static_cast<std::size_t>(network.relay_count());
  LinearProgram lp(vars);
  lp.rows.assign(2 * relays + 2, std::vector<double>(vars, 0.0));
  lp.rhs.assign(2 * relays + 2, 1.0);
  for (std::size_t c = 0; c < table.columns(); ++c) {
    const PathInfo& p = table.info[table.usable[c]];
    for (LinkId id : p.links) {
      const Link& l = network.link(id);
      const double f = p.capacity / l.capacity;
      lp.rows[static_cast<std::size_t>(l.src)][c] += f;
      lp.rows[relays + static_cast<std::size_t>(l.dst)][c] += f;
    }
  }
  return lp;
}

Schedule schedule_from(std::span<const Path> paths, const PathTable& table,
                       std::span<const double> x) {
  Schedule schedule;
  schedule.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    double v = 0.0;
    if (table.column[i] >= 0) v = x[static_cast<std::size_t>(table.column[i])];
    if (v < 1e-12) v = 0.0;
    schedule.push_back({paths[i], v});
  }
  return schedule;
}

RateSolution empty_solution(std::span<const Path> paths) {
  RateSolution sol;
  for (const Path& p : paths) sol.schedule.push_back({p, 0.0});
  return sol;
}

// Maximizes sum_c weight[c] x_c under the node rows.
RateSolution solve_weighted(const Network& network, std::span<const Path> paths,
                            const PathTable& table, const std::vector<double>& weight,
                            const RateOptions& options) {
  if (table.columns() == 0) return empty_solution(paths);
  LinearProgram lp = node_constrained_lp(network, table, 0);
  lp.objective = weight;
  LpSolution lps = solver_of(options).solve(lp);
  RateSolution sol;
  sol.status = lps.status;
  if (!lps.x.empty()) {
    sol.schedule = schedule_from(paths, table, lps.x);
  } else {
    sol.schedule = empty_solution(paths).schedule;
  }
  sol.value = lps.status == LpStatus::kOptimal ? lps.objective : 0.0;
  return sol;
}

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // Exact while the value stays below the cap.
  long double v = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) {
    v = v * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (v > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::size_t>(std::llround(static_cast<double>(v)));
}

// Calls fn(combination) for every k-subset of [0, n) in lexicographic order.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  while (true) {
    fn(std::span<const std::size_t>(idx));
    if (k == 0) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

using Bits = std::vector<std::uint64_t>;

bool is_subset(const Bits& a, const Bits& b) {
  for (std::size_t w = 0; w < a.size(); ++w) {
    if ((a[w] & ~b[w]) != 0) return false;
  }
  return true;
}

std::size_t popcount(const Bits& a) {
  std::size_t c = 0;
  for (auto w : a) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<LinkId> links_used_by(const PathTable& table, std::span<const std::size_t> paths) {
  std::vector<LinkId> used;
  for (std::size_t i : paths) {
    used.insert(used.end(), table.info[i].links.begin(), table.info[i].links.end());
  }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  return used;
}

[[noreturn]] void budget_exceeded(std::size_t links, std::size_t k, std::size_t cap) {
  throw Error(ErrorCode::kBudgetExceeded,
              "blockage pattern budget exceeded: C(" + std::to_string(links) + ", " +
                  std::to_string(k) + ") patterns exceed the cap of " + std::to_string(cap));
}

struct Pattern {
  Bits blocked_paths;  // over LP columns
  std::vector<LinkId> links;
};

// Every distinct blocked-column set reachable with k blocked links. Only links
// on some usable path matter: swapping an off-path link for an on-path one
// never unblocks a path.
std::vector<Pattern> enumerate_patterns(const PathTable& table, int k, std::size_t cap) {
  const std::vector<LinkId> used = links_used_by(table, table.usable);
  const std::size_t kk = std::min(static_cast<std::size_t>(k), used.size());
  if (binomial_capped(used.size(), kk, cap) > cap) budget_exceeded(used.size(), kk, cap);

  const std::size_t words = (table.columns() + 63) / 64;
  std::vector<Bits> through(used.size(), Bits(words, 0));
  for (std::size_t c = 0; c < table.columns(); ++c) {
    for (LinkId id : table.info[table.usable[c]].links) {
      auto pos = static_cast<std::size_t>(
          std::lower_bound(used.begin(), used.end(), id) - used.begin());
      through[pos][c / 64] |= std::uint64_t{1} << (c % 64);
    }
  }

  std::vector<Pattern> patterns;
  for_each_combination(used.size(), kk, [&](std::span<const std::size_t> combo) {
    Pattern p;
    p.blocked_paths.assign(words, 0);
    for (std::size_t i : combo) {
      for (std::size_t w = 0; w < words; ++w) p.blocked_paths[w] |= through[i][w];
      p.links.push_back(used[i]);
    }
    patterns.push_back(std::move(p));
  });
  return patterns;
}

// Drops patterns whose blocked set is contained in another pattern's: their
// constraint is implied. The first pattern of each maximal set survives.
std::vector<std::size_t> maximal_patterns(const std::vector<Pattern>& patterns) {
  std::vector<std::size_t> order(patterns.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> counts(patterns.size());
  for (std::size_t i = 0; i < patterns.size(); ++i) counts[i] = popcount(patterns[i].blocked_paths);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool dominated = false;
    for (std::size_t j : kept) {
      if (is_subset(patterns[i].blocked_paths, patterns[j].blocked_paths)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

bool bit_set(const Bits& b, std::size_t i) { return (b[i / 64] >> (i % 64)) & 1U; }

}  // namespace

RateSolution approx_capacity(const Network& network, std::span<const Path> paths,
                             const RateOptions& options) {
  PathTable table(network, paths);
  std::vector<double> w;
  for (std::size_t i : table.usable) w.push_back(table.info[i].capacity);
  return solve_weighted(network, paths, table, w, options);
}

RateSolution optimal_average(const Network& network, std::span<const Path> paths,
                             const RateOptions& options) {
  PathTable table(network, paths);
  std::vector<double> w;
  for (std::size_t i : table.usable) w.push_back(table.info[i].capacity * table.info[i].success);
  return solve_weighted(network, paths, table, w, options);
}

double plain_lp_average_rate(const Network& network, std::span<const Path> paths,
                             const RateOptions& options) {
  RateSolution sol = approx_capacity(network, paths, options);
  double avg = 0.0;
  for (const ScheduleEntry& e : sol.schedule) {
    if (e.activation > 0.0) {
      avg += e.activation * path_capacity(network, e.path) * path_success(network, e.path);
    }
  }
  return avg;
}

RateSolution optimal_worst_case(const Network& network, std::span<const Path> paths,
                                int blocked_links, const RateOptions& options) {
  if (blocked_links < 0 || static_cast<std::size_t>(blocked_links) > network.link_count()) {
    throw Error(ErrorCode::kPrecondition, "blocked link count must lie in [0, |links|]");
  }
  PathTable table(network, paths);
  if (table.columns() == 0) return empty_solution(paths);

  const std::vector<Pattern> patterns =
      enumerate_patterns(table, blocked_links, options.pattern_cap);
  const std::vector<std::size_t> kept = maximal_patterns(patterns);

  const std::size_t cols = table.columns();
  LinearProgram lp = node_constrained_lp(network, table, 1);
  lp.objective[cols] = 1.0;
  for (std::size_t pi : kept) {
    std::vector<double> row(cols + 1, 0.0);
    row[cols] = 1.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!bit_set(patterns[pi].blocked_paths, c)) {
        row[c] = -table.info[table.usable[c]].capacity;
      }
    }
    lp.add_row(std::move(row), 0.0);
  }

  LpSolution lps = solver_of(options).solve(lp);
  RateSolution sol;
  sol.status = lps.status;
  if (lps.status != LpStatus::kOptimal) {
    sol.schedule = empty_solution(paths).schedule;
    return sol;
  }
  sol.schedule = schedule_from(paths, table, lps.x);
  sol.value = lps.x[cols];

  // Witness: the pattern leaving the least delivered rate.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t pi : kept) {
    double r = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!bit_set(patterns[pi].blocked_paths, c)) {
        r += table.info[table.usable[c]].capacity * lps.x[c];
      }
    }
    if (r < best - 1e-12) {
      best = r;
      sol.worst_pattern = patterns[pi].links;
    }
  }
  return sol;
}

RateSolution feasibility_schedule(const Network& network, std::span<const Path> paths,
                                  double target_rate, const RateOptions& options) {
  if (!(target_rate >= 0.0) || !std::isfinite(target_rate)) {
    throw Error(ErrorCode::kPrecondition, "target rate must be finite and nonnegative");
  }
  PathTable table(network, paths);
  if (table.columns() == 0) {
    RateSolution sol = empty_solution(paths);
    if (target_rate > 0.0) sol.status = LpStatus::kInfeasible;
    return sol;
  }
  const std::size_t cols = table.columns();
  LinearProgram lp = node_constrained_lp(network, table, 0);
  std::vector<double> up(cols), down(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    up[c] = table.info[table.usable[c]].capacity;
    down[c] = -up[c];
  }
  lp.add_row(std::move(up), target_rate);
  lp.add_row(std::move(down), -target_rate);

  LpSolution lps = solver_of(options).solve(lp);
  RateSolution sol;
  sol.status = lps.status;
  sol.schedule = lps.status == LpStatus::kOptimal ? schedule_from(paths, table, lps.x)
                                                  : empty_solution(paths).schedule;
  return sol;
}

RateSolution solve_rate_problem(const Network& network, std::span<const Path> paths,
                                const RateObjective& objective, const RateOptions& options) {
  switch (objective.kind) {
    case ObjectiveKind::kApproxCapacity: return approx_capacity(network, paths, options);
    case ObjectiveKind::kWorstCase:
      return optimal_worst_case(network, paths, objective.blocked_links, options);
    case ObjectiveKind::kAverage: return optimal_average(network, paths, options);
    case ObjectiveKind::kFeasibility:
      return feasibility_schedule(network, paths, objective.target_rate, options);
  }
  throw Error(ErrorCode::kInternal, "unknown objective");
}

double worst_case_rate(const Network& network, const Schedule& schedule, int blocked_links,
                       std::size_t pattern_cap) {
  if (blocked_links < 0) throw Error(ErrorCode::kPrecondition, "negative blocked link count");
  std::vector<std::vector<LinkId>> links;
  std::vector<double> rate;
  for (const ScheduleEntry& e : schedule) {
    if (e.activation <= 0.0) continue;
    links.push_back(path_links(network, e.path));
    rate.push_back(e.activation * path_capacity(network, e.path));
  }
  std::vector<LinkId> used;
  for (const auto& l : links) used.insert(used.end(), l.begin(), l.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  const std::size_t kk = std::min(static_cast<std::size_t>(blocked_links), used.size());
  if (binomial_capped(used.size(), kk, pattern_cap) > pattern_cap) {
    budget_exceeded(used.size(), kk, pattern_cap);
  }

  double worst = std::numeric_limits<double>::infinity();
  for_each_combination(used.size(), kk, [&](std::span<const std::size_t> combo) {
    BlockageRealization b(network.link_count());
    for (std::size_t i : combo) b.block(used[i]);
    double r = 0.0;
    for (std::size_t p = 0; p < links.size(); ++p) {
      if (!b.blocks_any(links[p])) r += rate[p];
    }
    worst = std::min(worst, r);
  });
  return std::isfinite(worst) ? worst : 0.0;
}

std::vector<TradeoffPoint> tradeoff_curve(const Network& network, std::span<const Path> paths,
                                          int max_failures, const RateOptions& options) {
  if (max_failures < 0 || static_cast<std::size_t>(max_failures) > network.link_count()) {
    throw Error(ErrorCode::kPrecondition, "k*_max must lie in [0, |links|]");
  }
  std::vector<TradeoffPoint> out;
  for (int design = 0; design <= max_failures; ++design) {
    const RateSolution sol = optimal_worst_case(network, paths, design, options);
    for (int k = 0; k <= max_failures; ++k) {
      out.push_back({design, k, worst_case_rate(network, sol.schedule, k, options.pattern_cap)});
    }
  }
  return out;
}

namespace {

bool share_link(const std::vector<LinkId>& a, const std::vector<LinkId>& b) {
  for (LinkId x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  }
  return false;
}

// Largest pairwise edge-disjoint subset of `candidates`; ties favour earlier
// candidates.
struct DisjointSearch {
  const std::vector<std::vector<LinkId>>& links;
  const std::vector<std::size_t>& candidates;
  std::vector<std::size_t> best;
  std::vector<std::size_t> chosen;

  void run(std::size_t i) {
    if (chosen.size() + (candidates.size() - i) <= best.size()) return;
    if (i == candidates.size()) {
      best = chosen;
      return;
    }
    const std::size_t p = candidates[i];
    bool fits = true;
    for (std::size_t q : chosen) {
      if (share_link(links[p], links[q])) {
        fits = false;
        break;
      }
    }
    if (fits) {
      chosen.push_back(p);
      run(i + 1);
      chosen.pop_back();
    }
    run(i + 1);
  }
};

}  // namespace

EdgeDisjointSolution edge_disjoint_worst_case(const Network& network, int blocked_links,
                                              const RateOptions& options) {
  const PathEnumeration all = enumerate_paths(network);
  if (all.truncated) {
    throw Error(ErrorCode::kBudgetExceeded, "path enumeration truncated");
  }
  return edge_disjoint_worst_case(network, all.paths, blocked_links, options);
}

EdgeDisjointSolution edge_disjoint_worst_case(const Network& network,
                                              std::span<const Path> paths, int blocked_links,
                                              const RateOptions& options) {
  const auto links = network.links();
  EdgeDisjointSolution out;
  if (links.empty() || paths.empty()) return out;
  const double m = links.front().capacity;
  for (const Link& l : links) {
    if (!(m > 0.0) || std::abs(l.capacity - m) > 1e-12 * m) {
      throw Error(ErrorCode::kPrecondition,
                  "edge-disjoint construction requires equal positive link capacities");
    }
  }

  const RateSolution sol = optimal_worst_case(network, paths, blocked_links, options);
  const double t_star = sol.value;

  std::vector<std::vector<LinkId>> plinks;
  for (const Path& p : paths) plinks.push_back(path_links(network, p));
  const std::vector<std::size_t> active = sol.active(kActiveThreshold);

  // U: active paths that share no link with any other active path.
  std::vector<std::size_t> lone, overlapping;
  for (std::size_t p : active) {
    bool overlaps = false;
    for (std::size_t q : active) {
      if (p != q && share_link(plinks[p], plinks[q])) {
        overlaps = true;
        break;
      }
    }
    (overlaps ? overlapping : lone).push_back(p);
  }

  if (overlapping.empty()) {
    for (std::size_t p : active) {
      out.paths.push_back(paths[p]);
      out.schedule.push_back(sol.schedule[p]);
    }
    out.worst_case_rate = t_star;
    out.from_lp = true;
    return out;
  }

  // H: the largest edge-disjoint pick among the overlapping clusters.
  DisjointSearch search{plinks, overlapping, {}, {}};
  search.run(0);
  std::vector<std::size_t> chosen = lone;
  chosen.insert(chosen.end(), search.best.begin(), search.best.end());
  std::sort(chosen.begin(), chosen.end());

  const auto remaining = static_cast<double>(chosen.size()) - blocked_links;
  const double x = remaining > 0.0 && t_star > 0.0 ? t_star / (m * remaining) : 0.0;
  for (std::size_t p : chosen) {
    out.paths.push_back(paths[p]);
    out.schedule.push_back({paths[p], x});
  }
  out.worst_case_rate = x > 0.0 ? t_star : 0.0;
  return out;
}

RateMoments rate_moments(const Network& network, const Schedule& schedule,
                         const MomentOptions& options) {
  std::vector<std::vector<LinkId>> links;
  std::vector<double> rate;
  for (const ScheduleEntry& e : schedule) {
    if (e.activation <= 0.0) continue;
    links.push_back(path_links(network, e.path));
    rate.push_back(e.activation * path_capacity(network, e.path));
  }
  std::vector<LinkId> used;
  for (const auto& l : links) used.insert(used.end(), l.begin(), l.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());

  RateMoments out;
  if (used.size() <= options.exhaustive_link_limit && used.size() < 63) {
    std::vector<std::uint64_t> mask(links.size(), 0);
    for (std::size_t p = 0; p < links.size(); ++p) {
      for (LinkId id : links[p]) {
        auto pos = std::lower_bound(used.begin(), used.end(), id) - used.begin();
        mask[p] |= std::uint64_t{1} << pos;
      }
    }
    double mean = 0.0, second = 0.0;
    const std::uint64_t total = std::uint64_t{1} << used.size();
    for (std::uint64_t blocked = 0; blocked < total; ++blocked) {
      double prob = 1.0;
      for (std::size_t i = 0; i < used.size(); ++i) {
        const double pb = network.link(used[i]).block_prob;
        prob *= ((blocked >> i) & 1U) ? pb : 1.0 - pb;
      }
      if (prob == 0.0) continue;
      double r = 0.0;
      for (std::size_t p = 0; p < links.size(); ++p) {
        if ((blocked & mask[p]) == 0) r += rate[p];
      }
      mean += prob * r;
      second += prob * r * r;
    }
    out.mean = mean;
    out.variance = std::max(0.0, second - mean * mean);
    out.exhaustive = true;
    return out;
  }

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<bool> blocked(network.link_count(), false);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t s = 1; s <= options.monte_carlo_samples; ++s) {
    for (LinkId id : used) {
      blocked[static_cast<std::size_t>(id)] = unif(rng) < network.link(id).block_prob;
    }
    double r = 0.0;
    for (std::size_t p = 0; p < links.size(); ++p) {
      bool ok = std::none_of(links[p].begin(), links[p].end(),
                             [&](LinkId id) { return blocked[static_cast<std::size_t>(id)]; });
      if (ok) r += rate[p];
    }
    const double delta = r - mean;
    mean += delta / static_cast<double>(s);
    m2 += delta * (r - mean);
  }
  out.mean = mean;
  out.variance = options.monte_carlo_samples > 0
                     ? m2 / static_cast<double>(options.monte_carlo_samples)
                     : 0.0;
  return out;
}

}  // namespace mmsched
