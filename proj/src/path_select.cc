#include "mmsched/path_select.h"

#include <algorithm>
#include <limits>
#include <map>

#include "mmsched/error.h"
#include "mmsched/net_gen.h"

namespace mmsched {

SelectionState best_path_labels(const Network& network) {
  const auto n = static_cast<std::size_t>(network.node_count());
  SelectionState s;
  s.weight.assign(n, std::nullopt);
  s.capacity.assign(n, -std::numeric_limits<double>::infinity());
  s.success.assign(n, 1.0);
  s.previous.assign(n, std::nullopt);
  s.weight[0] = std::numeric_limits<double>::infinity();
  s.capacity[0] = std::numeric_limits<double>::infinity();

  std::vector<bool> settled(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    // Largest weight first; unreached nodes rank below everything.
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (settled[v]) continue;
      if (u == n) {
        u = v;
      } else if (s.weight[v] && (!s.weight[u] || *s.weight[v] > *s.weight[u])) {
        u = v;
      }
    }
    settled[u] = true;
    if (!s.weight[u]) continue;

    for (LinkId id : network.out_links(static_cast<NodeId>(u))) {
      const Link& l = network.link(id);
      const auto v = static_cast<std::size_t>(l.dst);
      if (settled[v]) continue;
      const double a = s.success[u] * (1.0 - l.block_prob);
      const double b = std::min(s.capacity[u], l.capacity);
      if (!s.weight[v] || a * b > *s.weight[v]) {
        s.weight[v] = a * b;
        s.success[v] = a;
        s.capacity[v] = b;
        s.previous[v] = static_cast<NodeId>(u);
      }
    }
  }
  return s;
}

std::optional<Path> select_best_path(const Network& network) {
  const SelectionState s = best_path_labels(network);
  Path p;
  std::optional<NodeId> u = network.destination();
  while (u) {
    if (!s.previous[static_cast<std::size_t>(*u)] && *u != network.source()) {
      return std::nullopt;
    }
    p.nodes.insert(p.nodes.begin(), *u);
    u = s.previous[static_cast<std::size_t>(*u)];
  }
  return p;
}

std::vector<Path> select_paths(const Network& network) {
  std::vector<Path> selected;
  const auto limit = static_cast<std::size_t>(5 * network.relay_count());
  Network work = network;
  while (selected.size() < limit) {
    std::optional<Path> best = select_best_path(work);
    if (!best) break;
    const std::vector<LinkId> links = path_links(work, *best);
    LinkId weakest = links.front();
    auto value = [&work](LinkId id) {
      return work.link(id).capacity * (1.0 - work.link(id).block_prob);
    };
    for (LinkId id : links) {
      const Link& l = work.link(id);
      const Link& w = work.link(weakest);
      if (value(id) < value(weakest) ||
          (value(id) == value(weakest) &&
           std::pair(l.src, l.dst) < std::pair(w.src, w.dst))) {
        weakest = id;
      }
    }
    selected.push_back(std::move(*best));
    work = work.without_link(weakest);
  }
  return selected;
}

namespace {

double best_score(std::span<const Network> variants, const Path& p) {
  double best = 0.0;
  for (const Network& v : variants) best = std::max(best, path_capacity(v, p) * path_success(v, p));
  return best;
}

void top_up(std::vector<std::pair<Path, double>>& pool, std::map<Path, std::size_t>& index,
            CandidatePaths& out, std::size_t min_paths) {
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&pool](std::size_t a, std::size_t b) {
    return pool[a].second > pool[b].second;
  });
  for (std::size_t i : order) {
    if (out.paths.size() >= min_paths) break;
    if (index.contains(pool[i].first)) continue;
    index.emplace(pool[i].first, out.paths.size());
    out.paths.push_back(pool[i].first);
  }
}

}  // namespace

CandidatePaths build_candidate_paths(std::span<const Network> variants,
                                     const CandidateOptions& options,
                                     std::span<const Path> fallback) {
  if (variants.empty()) throw Error(ErrorCode::kPrecondition, "no network variants given");
  if (options.min_paths < 1) throw Error(ErrorCode::kPrecondition, "min_paths must be >= 1");

  CandidatePaths out;
  std::map<Path, std::size_t> index;  // path -> position in out.paths
  // Best C_p * S_p seen for pooled paths not yet chosen, with first-seen order.
  std::vector<std::pair<Path, double>> pool;
  std::map<Path, std::size_t> pool_index;

  for (const Network& variant : variants) {
    const std::vector<Path> selected = select_paths(variant);
    const RateSolution sol = optimal_average(variant, selected, options.rate);
    for (std::size_t i = 0; i < selected.size(); ++i) {
      const Path& p = selected[i];
      if (sol.schedule[i].activation > options.activation_threshold) {
        if (!index.contains(p)) {
          index.emplace(p, out.paths.size());
          out.paths.push_back(p);
        }
      }
      const double score = path_capacity(variant, p) * path_success(variant, p);
      auto it = pool_index.find(p);
      if (it == pool_index.end()) {
        pool_index.emplace(p, pool.size());
        pool.emplace_back(p, score);
      } else {
        pool[it->second].second = std::max(pool[it->second].second, score);
      }
    }
  }

  top_up(pool, index, out, options.min_paths);
  if (out.paths.size() < options.min_paths && !fallback.empty()) {
    std::vector<std::pair<Path, double>> extra;
    for (const Path& p : fallback) {
      if (!index.contains(p)) extra.emplace_back(p, best_score(variants, p));
    }
    top_up(extra, index, out, options.min_paths);
  }
  out.shortfall = out.paths.size() < options.min_paths;
  return out;
}

std::vector<Network> lambda_variants(const Network& network,
                                     std::span<const std::vector<double>> lambda_sets,
                                     const LambdaVariantOptions& options) {
  std::vector<Network> out;
  for (std::size_t i = 0; i < lambda_sets.size(); ++i) {
    Network base = network;
    if (options.resample_capacities) {
      base = resample_capacities(network, derive_seed(options.seed, "variant-capacity", i),
                                 options.capacity_stddev);
    }
    out.push_back(assign_blockage(base, lambda_sets[i], options.tau_b));
  }
  return out;
}

}  // namespace mmsched
