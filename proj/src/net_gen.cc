#include "mmsched/net_gen.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "mmsched/error.h"

namespace mmsched {

void GenConfig::validate() const {
  if (relay_count < 1) throw Error(ErrorCode::kConfig, "relay_count must be >= 1");
  if (!(coord_min < coord_max)) throw Error(ErrorCode::kConfig, "coordinate range is empty");
  if (!(lambda_min <= lambda_max) || lambda_min < 0.0) {
    throw Error(ErrorCode::kConfig, "lambda range must satisfy 0 <= min <= max");
  }
  if (!(tau_b > 0.0)) throw Error(ErrorCode::kConfig, "tau_b must be positive");
  if (reference_snr && !(*reference_snr > 0.0)) {
    throw Error(ErrorCode::kConfig, "reference_snr must be positive");
  }
  if (!(target_mean_capacity > 0.0)) {
    throw Error(ErrorCode::kConfig, "target_mean_capacity must be positive");
  }
  if (!(min_distance > 0.0)) throw Error(ErrorCode::kConfig, "min_distance must be positive");
  if (path_count_cap < min_path_count) {
    throw Error(ErrorCode::kConfig, "path_count_cap must be >= min_path_count");
  }
  if (!seed) throw Error(ErrorCode::kConfig, "a seed is required");
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  // FNV-1a over the stream name, then splitmix64 finalization.
  std::uint64_t h = 14695981039346656037ull;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed ^ h ^ (index * 0x9e3779b97f4a7c15ull);
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double sample_rician_gain(std::mt19937_64& rng, double k_db) {
  const double k = std::pow(10.0, k_db / 10.0);
  const double los = std::sqrt(k / (k + 1.0));
  std::normal_distribution<double> scatter(0.0, std::sqrt(1.0 / (2.0 * (k + 1.0))));
  const double re = los + scatter(rng);
  const double im = scatter(rng);
  return re * re + im * im;
}

namespace {

std::size_t saturating_add(std::size_t a, std::size_t b) {
  const std::size_t max = std::numeric_limits<std::size_t>::max();
  return a > max - b ? max : a + b;
}

// Path counts over a forward-only adjacency matrix.
std::size_t count_forward_paths(const std::vector<std::vector<bool>>& adj) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> ways(n, 0);
  ways[n - 1] = 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (adj[i][j]) ways[i] = saturating_add(ways[i], ways[j]);
    }
  }
  return ways[0];
}

double mean_capacity(std::span<const double> gain_over_d2, double snr) {
  double sum = 0.0;
  for (double g : gain_over_d2) sum += std::log2(1.0 + snr * g);
  return sum / static_cast<double>(gain_over_d2.size());
}

}  // namespace

std::size_t count_dag_paths(const Network& network) {
  const auto n = static_cast<std::size_t>(network.node_count());
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const Link& l : network.links()) {
    if (l.dst <= l.src) {
      throw Error(ErrorCode::kPrecondition, "network is not ordered forward");
    }
    adj[static_cast<std::size_t>(l.src)][static_cast<std::size_t>(l.dst)] = true;
  }
  return count_forward_paths(adj);
}

GeneratedNetwork generate_topology(const GenConfig& config) {
  config.validate();
  const int relays = config.relay_count;
  const auto n = static_cast<std::size_t>(relays + 2);

  std::mt19937_64 rng(derive_seed(*config.seed, "topology"));
  std::uniform_real_distribution<double> coord(config.coord_min, config.coord_max);
  auto draw = [&] { Point p; p.x = coord(rng); p.y = coord(rng); return p; };
  const Point source = draw();
  const Point destination = draw();
  std::vector<Point> relay_points(static_cast<std::size_t>(relays));
  for (Point& p : relay_points) p = draw();

  auto dist = [](const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); };
  std::stable_sort(relay_points.begin(), relay_points.end(),
                   [&](const Point& a, const Point& b) {
                     return dist(source, a) < dist(source, b);
                   });
  std::vector<Point> pos;
  pos.reserve(n);
  pos.push_back(source);
  pos.insert(pos.end(), relay_points.begin(), relay_points.end());
  pos.push_back(destination);

  const std::size_t dst = n - 1;
  auto allowed = [dst](std::size_t i, std::size_t j) { return i < j && !(i == 0 && j == dst); };

  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  // Nearest forward neighbour of every node and nearest backward neighbour of
  // every node, so each relay has an incoming and an outgoing link.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best_fwd = n;
    std::size_t best_bwd = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (allowed(i, j) && (best_fwd == n || dist(pos[i], pos[j]) < dist(pos[i], pos[best_fwd]))) {
        best_fwd = j;
      }
      if (allowed(j, i) && (best_bwd == n || dist(pos[j], pos[i]) < dist(pos[best_bwd], pos[i]))) {
        best_bwd = j;
      }
    }
    if (best_fwd != n) adj[i][best_fwd] = true;
    if (best_bwd != n) adj[best_bwd][i] = true;
  }

  struct Candidate {
    double d;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (allowed(i, j) && !adj[i][j]) candidates.push_back({dist(pos[i], pos[j]), i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.d, a.i, a.j) < std::tie(b.d, b.i, b.j);
  });

  std::size_t paths = count_forward_paths(adj);
  for (const Candidate& c : candidates) {
    if (paths >= config.min_path_count) break;
    adj[c.i][c.j] = true;
    const std::size_t with = count_forward_paths(adj);
    if (with > config.path_count_cap) {
      adj[c.i][c.j] = false;
      continue;
    }
    paths = with;
  }

  std::vector<Link> links;
  std::vector<double> gain_over_d2;
  std::mt19937_64 fading(derive_seed(*config.seed, "fading"));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!adj[i][j]) continue;
      Link l;
      l.src = static_cast<NodeId>(i);
      l.dst = static_cast<NodeId>(j);
      links.push_back(l);
      const double d = std::max(dist(pos[i], pos[j]), config.min_distance);
      gain_over_d2.push_back(sample_rician_gain(fading, config.rician_k_db) / (d * d));
    }
  }

  double snr = 1.0;
  if (config.reference_snr) {
    snr = *config.reference_snr;
  } else if (!links.empty()) {
    double lo = std::log(1e-9);
    double hi = std::log(1e15);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mean_capacity(gain_over_d2, std::exp(mid)) < config.target_mean_capacity) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    snr = std::exp(0.5 * (lo + hi));
  }
  for (std::size_t e = 0; e < links.size(); ++e) {
    links[e].capacity = std::log2(1.0 + snr * gain_over_d2[e]);
  }

  GeneratedNetwork out;
  out.network = Network(relays, std::move(links), std::move(pos));
  out.path_count = paths;
  out.reference_snr = snr;
  out.path_count_warning = paths < config.min_path_count;
  return out;
}

Network assign_blockage(const Network& network, std::span<const double> lambda, double tau_b) {
  if (lambda.size() != network.link_count()) {
    throw Error(ErrorCode::kPrecondition, "one lambda per link is required");
  }
  if (!(tau_b > 0.0)) throw Error(ErrorCode::kPrecondition, "tau_b must be positive");
  std::vector<double> probs(network.link_count());
  for (std::size_t e = 0; e < probs.size(); ++e) {
    if (!(lambda[e] >= 0.0)) throw Error(ErrorCode::kPrecondition, "lambda must be >= 0");
    const Link& l = network.link(static_cast<LinkId>(e));
    const double alpha = lambda[e] * network.distance(l.src, l.dst);
    probs[e] = -std::expm1(-alpha * tau_b);
  }
  return network.with_block_probs(probs);
}

std::vector<double> sample_lambdas(const Network& network, double lambda_min,
                                   double lambda_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lambda_min, lambda_max);
  std::vector<double> out(network.link_count());
  for (double& v : out) v = lambda_min == lambda_max ? lambda_min : dist(rng);
  return out;
}

BlockageRealization sample_blockage(const Network& network, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BlockageRealization out(network.link_count());
  for (std::size_t e = 0; e < network.link_count(); ++e) {
    // One draw per link keeps the stream aligned regardless of p.
    const double draw = u(rng);
    if (draw < network.link(static_cast<LinkId>(e)).block_prob) {
      out.block(static_cast<LinkId>(e));
    }
  }
  return out;
}

Network resample_capacities(const Network& network, std::uint64_t seed, double stddev) {
  if (!(stddev >= 0.0)) throw Error(ErrorCode::kPrecondition, "stddev must be >= 0");
  std::vector<double> caps(network.link_count());
  if (stddev == 0.0) {
    for (std::size_t e = 0; e < caps.size(); ++e) {
      caps[e] = network.link(static_cast<LinkId>(e)).capacity;
    }
    return network.with_capacities(caps);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, stddev);
  for (std::size_t e = 0; e < caps.size(); ++e) {
    caps[e] = std::max(0.0, network.link(static_cast<LinkId>(e)).capacity + noise(rng));
  }
  return network.with_capacities(caps);
}

}  // namespace mmsched
