#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "mmsched/lp.h"
#include "mmsched/network.h"

namespace testsupport {

using mmsched::Link;
using mmsched::LinkId;
using mmsched::Network;
using mmsched::Path;
using mmsched::Schedule;

inline Path path(std::vector<int> nodes) { return Path{std::move(nodes)}; }

// Five disjoint two-hop relays; relay i has both links at capacity i^2.
inline Network ladder5() {
  std::vector<Link> links;
  for (int i = 1; i <= 5; ++i) {
    links.push_back({0, i, double(i * i), 0.0});
    links.push_back({i, 6, double(i * i), 0.0});
  }
  return Network(5, links);
}

// Same shape with capacity i, blockage 1/10 except 2/3 on relay 5.
inline Network ladder5_blockage() {
  std::vector<Link> links;
  for (int i = 1; i <= 5; ++i) {
    const double p = i == 5 ? 2.0 / 3.0 : 0.1;
    links.push_back({0, i, double(i), p});
    links.push_back({i, 6, double(i), p});
  }
  return Network(5, links);
}

// Two branches merging at node 3; the high-capacity branch has a fragile link.
inline Network diamond() {
  return Network(3, {{0, 1, 3, 0}, {1, 3, 3, 0}, {0, 2, 4, 0}, {2, 3, 12, 2.0 / 3.0},
                     {3, 4, 6, 0}});
}

// The widest-then-safest greedy choice is worse than the alternative route.
inline Network greedy_trap() {
  return Network(3, {{0, 1, 10, 0}, {0, 2, 10, 0}, {2, 3, 6, 0.5}, {1, 3, 1, 0},
                     {3, 4, 1, 0}});
}

// Thirteen relays, four overlapping paths through 2->3 plus a disjoint
// capacity-4 chain. `chain_capacity` and the probabilities are adjustable.
inline Network overlap13(double chain_capacity = 4.0, double p_main = 0.0,
                         double p_chain = 0.0) {
  std::vector<Link> links;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {3, 4}, {4, 5}, {5, 13}, {7, 8}}) {
    links.push_back({a, b, 1.0, p_main});
  }
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 6}, {6, 2}, {2, 3}, {3, 7}, {8, 13}}) {
    links.push_back({a, b, 2.0, p_main});
  }
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 9}, {9, 10}, {10, 11}, {11, 12}, {12, 13}}) {
    links.push_back({a, b, chain_capacity, p_chain});
  }
  return Network(12, links);
}

// overlap13 without the chain; every link at capacity 2 and blockage 1/5.
inline Network overlap13_uniform() {
  std::vector<Link> links;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 13},
                                                     {0, 6}, {6, 2}, {3, 7}, {7, 8}, {8, 13}}) {
    links.push_back({a, b, 2.0, 0.2});
  }
  return Network(12, links);
}

// Random directed network on n_relays relays. Links never enter the source
// or leave the destination. Retries until the path count lies in
// [1, max_paths].
struct RandomNetworkOptions {
  int min_relays = 1;
  int max_relays = 8;
  double density = 0.35;
  bool equal_capacity = false;
  double capacity = 1.0;
  std::size_t max_paths = 600;
  bool random_blockage = true;
};

Network random_network(std::mt19937_64& rng, const RandomNetworkOptions& o);

// Small bounded LP: the first row caps the sum of variables, the rest are
// random integer rows that may make the program infeasible.
mmsched::LinearProgram random_lp(std::mt19937_64& rng);

// ---- Oracles -------------------------------------------------------------

struct OracleLp {
  bool feasible = false;
  double objective = 0.0;
};

// Best objective over all basic feasible points of
// max c.x s.t. A x <= b, x >= 0. Assumes the feasible region is bounded.
OracleLp vertex_enumeration(const mmsched::LinearProgram& lp);

// Delivered rate of a schedule with an explicit set of blocked links,
// computed directly from node sequences.
double rate_with_blocked(const Network& net, const Schedule& s,
                         const std::set<std::pair<int, int>>& blocked);

// Minimum delivered rate over every k-subset of all links.
double brute_worst_case(const Network& net, const Schedule& s, int k);

// Mean and variance by enumerating every blockage realization.
std::pair<double, double> brute_moments(const Network& net, const Schedule& s);

// Node utilizations recomputed from scratch; true if every node transmits
// and receives at most 1 + tol.
bool brute_feasible(const Network& net, const Schedule& s, double tol = 1e-9);

// All simple source-destination paths by breadth-first extension.
std::vector<Path> brute_paths(const Network& net);

}  // namespace testsupport
