#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "mmsched/network.h"

namespace mmsched {

struct GenConfig {
  int relay_count = 25;
  double coord_min = 0.0;
  double coord_max = 100.0;
  double lambda_min = 200.0;
  double lambda_max = 600.0;
  double tau_b = 5e-5;
  double rician_k_db = 10.0;
  // When unset, chosen so the mean link capacity equals target_mean_capacity.
  std::optional<double> reference_snr;
  double target_mean_capacity = 7.0;
  std::size_t min_path_count = 1000;
  // Links that would push the path count past this are skipped.
  std::size_t path_count_cap = 20000;
  // Distances below this are raised to it when computing capacities.
  double min_distance = 1.0;
  std::optional<std::uint64_t> seed;

  // Throws Error(kConfig) on empty ranges, N < 1 or a missing seed.
  void validate() const;
};

struct GeneratedNetwork {
  Network network;  // block probabilities all zero
  std::size_t path_count = 0;
  double reference_snr = 0.0;
  // Set when candidates ran out before min_path_count was reached.
  bool path_count_warning = false;
};

// Random geometric DAG. Relays are numbered by distance from the source, the
// destination comes last, and every link points to a higher-numbered node.
GeneratedNetwork generate_topology(const GenConfig& config);

// Number of source-to-destination paths of an acyclic network, saturating at
// SIZE_MAX. Throws Error(kPrecondition) if some link points backwards.
std::size_t count_dag_paths(const Network& network);

// p = 1 - exp(-lambda * d * tau_b) for every link, lambda indexed by link id.
Network assign_blockage(const Network& network, std::span<const double> lambda, double tau_b);

// Uniform lambda per link.
std::vector<double> sample_lambdas(const Network& network, double lambda_min,
                                   double lambda_max, std::uint64_t seed);

// Independent Bernoulli(p) per link.
BlockageRealization sample_blockage(const Network& network, std::uint64_t seed);

// capacity ~ max(0, Normal(static capacity, stddev)) per link.
Network resample_capacities(const Network& network, std::uint64_t seed, double stddev = 1.0);

// Rician power gain with unit mean.
double sample_rician_gain(std::mt19937_64& rng, double k_db);

// Deterministic child seed for a named stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

}  // namespace mmsched
