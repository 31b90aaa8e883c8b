#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmsched/network.h"
#include "mmsched/rate_opt.h"

namespace mmsched {

// Label state of the greedy highest-average-rate search. An empty weight
// means the node has not been reached; the source starts at +infinity.
struct SelectionState {
  std::vector<std::optional<double>> weight;
  std::vector<double> capacity;
  std::vector<double> success;
  std::vector<std::optional<NodeId>> previous;
};

// Runs the label-setting search from the source. Settles nodes in order of
// largest weight (ties: lowest node id) and relaxes with
//   a = success[u] * (1 - p_uv), b = min(capacity[u], l_uv),
// keeping a*b when it beats the neighbour's weight.
SelectionState best_path_labels(const Network& network);

// Greedy highest C_p * S_p path, or nullopt if the destination is unreachable.
// Not guaranteed optimal.
std::optional<Path> select_best_path(const Network& network);

// Repeats select_best_path, removing after each pick the link of the picked
// path with the smallest capacity * (1 - block_prob) (ties: smallest
// (src, dst)). At most 5N paths.
std::vector<Path> select_paths(const Network& network);

struct CandidateOptions {
  std::size_t min_paths = 10;
  double activation_threshold = 1e-9;
  RateOptions rate;
};

struct CandidatePaths {
  std::vector<Path> paths;
  // Fewer than min_paths distinct paths were available.
  bool shortfall = false;
};

// Union, over network variants (one per blockage / capacity assignment), of
// the paths the average-rate LP activates on the greedy pool of that variant.
// Tops up from the pools by C_p * S_p when the union is too small, then from
// `fallback` scored the same way.
CandidatePaths build_candidate_paths(std::span<const Network> variants,
                                     const CandidateOptions& options = {},
                                     std::span<const Path> fallback = {});

struct LambdaVariantOptions {
  double tau_b = 5e-5;
  bool resample_capacities = false;
  double capacity_stddev = 1.0;
  std::uint64_t seed = 0;
};

// One network per lambda assignment, with blockage probabilities from the
// distance model and, optionally, resampled capacities.
std::vector<Network> lambda_variants(const Network& network,
                                     std::span<const std::vector<double>> lambda_sets,
                                     const LambdaVariantOptions& options);

}  // namespace mmsched
