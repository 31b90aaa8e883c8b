#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mmsched {

using NodeId = int;
using LinkId = int;

struct Link {
  NodeId src = 0;
  NodeId dst = 0;
  // Bits per channel use when the link is active.
  double capacity = 0.0;
  // Probability that the link is permanently blocked within an epoch.
  double block_prob = 0.0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// A directed 1-2-1 relay network. Node 0 is the source, node relay_count()+1
// the destination, everything in between is a relay. Immutable once built;
// the with_* helpers return modified copies.
class Network {
 public:
  Network() : Network(0, {}) {}

  // Throws Error(kInvalidNetwork) when an invariant is violated: self loops,
  // links into the source or out of the destination, out-of-range endpoints,
  // duplicate links, negative capacities, probabilities outside [0, 1].
  Network(int relay_count, std::vector<Link> links,
          std::optional<std::vector<Point>> positions = std::nullopt);

  int relay_count() const { return relay_count_; }
  int node_count() const { return relay_count_ + 2; }
  NodeId source() const { return 0; }
  NodeId destination() const { return relay_count_ + 1; }

  std::span<const Link> links() const { return links_; }
  std::size_t link_count() const { return links_.size(); }
  const Link& link(LinkId id) const { return links_[static_cast<std::size_t>(id)]; }

  std::optional<LinkId> find_link(NodeId src, NodeId dst) const;
  // Outgoing link ids of a node in ascending destination order.
  std::span<const LinkId> out_links(NodeId node) const;

  bool has_positions() const { return positions_.has_value(); }
  const std::vector<Point>& positions() const;
  // Euclidean distance; throws Error(kDistanceUnavailable) without positions.
  double distance(NodeId a, NodeId b) const;

  Network with_capacities(std::span<const double> capacities) const;
  Network with_block_probs(std::span<const double> probs) const;
  Network without_link(LinkId id) const;

  bool operator==(const Network& other) const;

 private:
  bool valid_node(NodeId n) const { return n >= 0 && n < node_count(); }

  int relay_count_ = 0;
  std::vector<Link> links_;
  std::optional<std::vector<Point>> positions_;
  // node_count x node_count, -1 where there is no link.
  std::vector<LinkId> link_index_;
  std::vector<std::vector<LinkId>> out_links_;
};

// An ordered source-to-destination node sequence.
struct Path {
  std::vector<NodeId> nodes;

  auto operator<=>(const Path&) const = default;
  bool operator==(const Path&) const = default;

  std::string to_string() const;
};

// Link ids traversed by the path, in order. Throws Error(kInvalidPath) if the
// path is not a simple source-to-destination path of the network.
std::vector<LinkId> path_links(const Network& network, const Path& path);

struct ScheduleEntry {
  Path path;
  // Fraction of time the path is active.
  double activation = 0.0;
};

using Schedule = std::vector<ScheduleEntry>;

class BlockageRealization {
 public:
  BlockageRealization() = default;
  explicit BlockageRealization(std::size_t link_count)
      : blocked_(link_count, false) {}

  static BlockageRealization of_links(std::size_t link_count,
                                      std::span<const LinkId> blocked);

  std::size_t link_count() const { return blocked_.size(); }
  bool is_blocked(LinkId id) const {
    return blocked_[static_cast<std::size_t>(id)];
  }
  void block(LinkId id) { blocked_[static_cast<std::size_t>(id)] = true; }
  std::size_t blocked_count() const;
  std::vector<LinkId> blocked_links() const;
  bool blocks_any(std::span<const LinkId> links) const;

  bool operator==(const BlockageRealization&) const = default;

 private:
  std::vector<bool> blocked_;
};

// Bottleneck capacity: min link capacity along the path.
double path_capacity(const Network& network, const Path& path);

// Probability that no link of the path is blocked.
double path_success(const Network& network, const Path& path);

struct PathEnumeration {
  std::vector<Path> paths;
  bool truncated = false;
};

inline constexpr std::size_t kDefaultMaxPaths = 100000;

// All simple source-to-destination paths in lexicographic node order. Stops
// after max_paths paths and flags the result as truncated.
PathEnumeration enumerate_paths(const Network& network,
                                std::size_t max_paths = kDefaultMaxPaths);

inline constexpr double kFeasibilityTol = 1e-9;

struct ScheduleVerdict {
  bool valid = true;
  // Indexed by node id.
  std::vector<double> transmit_utilization;
  std::vector<double> receive_utilization;
  std::string reason;
};

// Evaluates the 1-2-1 half-beam constraints: every node transmits and
// receives at most 100% of the time.
ScheduleVerdict validate_schedule(const Network& network,
                                  const Schedule& schedule);

// Rate carried by the paths that avoid every blocked link. Blocked paths keep
// their airtime but deliver nothing.
double delivered_rate(const Network& network, const Schedule& schedule,
                      const BlockageRealization& blockage);

}  // namespace mmsched
