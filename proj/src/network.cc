#include "mmsched/network.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmsched/error.h"

namespace mmsched {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidNetwork: return "invalid_network";
    case ErrorCode::kInvalidPath: return "invalid_path";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kBudgetExceeded: return "budget_exceeded";
    case ErrorCode::kDistanceUnavailable: return "distance_unavailable";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kMalformedAction: return "bad_action";
    case ErrorCode::kOrdering: return "ordering";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

namespace {

[[noreturn]] void invalid_network(const std::string& what) {
  throw Error(ErrorCode::kInvalidNetwork, "invalid network: " + what);
}

std::string link_name(const Link& l) {
  std::ostringstream out;
  out << l.src << "->" << l.dst;
  return out.str();
}

}  // namespace

Network::Network(int relay_count, std::vector<Link> links,
                 std::optional<std::vector<Point>> positions)
    : relay_count_(relay_count),
      links_(std::move(links)),
      positions_(std::move(positions)) {
  if (relay_count_ < 0) invalid_network("negative relay count");
  const auto n = static_cast<std::size_t>(node_count());
  if (positions_ && positions_->size() != n) {
    invalid_network("expected " + std::to_string(n) + " node positions, got " +
                    std::to_string(positions_->size()));
  }
  link_index_.assign(n * n, -1);
  out_links_.assign(n, {});
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (!valid_node(l.src) || !valid_node(l.dst)) {
      invalid_network("link " + link_name(l) + " has an unknown endpoint");
    }
    if (l.src == l.dst) invalid_network("self loop at node " + std::to_string(l.src));
    if (l.dst == source()) invalid_network("link " + link_name(l) + " enters the source");
    if (l.src == destination()) {
      invalid_network("link " + link_name(l) + " leaves the destination");
    }
    if (!std::isfinite(l.capacity) || l.capacity < 0.0) {
      invalid_network("link " + link_name(l) + " has a negative or non-finite capacity");
    }
    if (!(l.block_prob >= 0.0 && l.block_prob <= 1.0)) {
      invalid_network("link " + link_name(l) + " has a blockage probability outside [0,1]");
    }
    LinkId& slot = link_index_[static_cast<std::size_t>(l.src) * n +
                               static_cast<std::size_t>(l.dst)];
    if (slot >= 0) invalid_network("duplicate link " + link_name(l));
    slot = static_cast<LinkId>(i);
    out_links_[static_cast<std::size_t>(l.src)].push_back(static_cast<LinkId>(i));
  }
  for (auto& out : out_links_) {
    std::sort(out.begin(), out.end(), [this](LinkId a, LinkId b) {
      return link(a).dst < link(b).dst;
    });
  }
}

std::optional<LinkId> Network::find_link(NodeId src, NodeId dst) const {
  if (!valid_node(src) || !valid_node(dst)) return std::nullopt;
  const auto n = static_cast<std::size_t>(node_count());
  LinkId id = link_index_[static_cast<std::size_t>(src) * n +
                          static_cast<std::size_t>(dst)];
  if (id < 0) return std::nullopt;
  return id;
}

std::span<const LinkId> Network::out_links(NodeId node) const {
  return out_links_[static_cast<std::size_t>(node)];
}

const std::vector<Point>& Network::positions() const {
  if (!positions_) {
    throw Error(ErrorCode::kDistanceUnavailable, "network has no node coordinates");
  }
  return *positions_;
}

double Network::distance(NodeId a, NodeId b) const {
  const auto& pos = positions();
  const Point& pa = pos[static_cast<std::size_t>(a)];
  const Point& pb = pos[static_cast<std::size_t>(b)];
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

Network Network::with_capacities(std::span<const double> capacities) const {
  if (capacities.size() != links_.size()) {
    throw Error(ErrorCode::kPrecondition, "capacity vector size does not match link count");
  }
  std::vector<Link> links = links_;
  for (std::size_t i = 0; i < links.size(); ++i) links[i].capacity = capacities[i];
  return Network(relay_count_, std::move(links), positions_);
}

Network Network::with_block_probs(std::span<const double> probs) const {
  if (probs.size() != links_.size()) {
    throw Error(ErrorCode::kPrecondition,
                "blockage probability vector size does not match link count");
  }
  std::vector<Link> links = links_;
  for (std::size_t i = 0; i < links.size(); ++i) links[i].block_prob = probs[i];
  return Network(relay_count_, std::move(links), positions_);
}

Network Network::without_link(LinkId id) const {
  std::vector<Link> links = links_;
  links.erase(links.begin() + id);
  return Network(relay_count_, std::move(links), positions_);
}

bool Network::operator==(const Network& other) const {
  if (relay_count_ != other.relay_count_ || links_.size() != other.links_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& a = links_[i];
    const Link& b = other.links_[i];
    if (a.src != b.src || a.dst != b.dst || a.capacity != b.capacity ||
        a.block_prob != b.block_prob) {
      return false;
    }
  }
  if (positions_.has_value() != other.positions_.has_value()) return false;
  if (positions_) {
    for (std::size_t i = 0; i < positions_->size(); ++i) {
      if ((*positions_)[i].x != (*other.positions_)[i].x ||
          (*positions_)[i].y != (*other.positions_)[i].y) {
        return false;
      }
    }
  }
  return true;
}

std::string Path::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) out += '-';
    out += std::to_string(nodes[i]);
  }
  return out;
}

std::vector<LinkId> path_links(const Network& network, const Path& path) {
  const auto& nodes = path.nodes;
  if (nodes.size() < 2 || nodes.front() != network.source() ||
      nodes.back() != network.destination()) {
    throw Error(ErrorCode::kInvalidPath,
                "path " + path.to_string() + " does not run from source to destination");
  }
  std::vector<bool> seen(static_cast<std::size_t>(network.node_count()), false);
  std::vector<LinkId> out;
  out.reserve(nodes.size() - 1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    NodeId n = nodes[i];
    if (n < 0 || n >= network.node_count() || seen[static_cast<std::size_t>(n)]) {
      throw Error(ErrorCode::kInvalidPath, "path " + path.to_string() + " is not simple");
    }
    seen[static_cast<std::size_t>(n)] = true;
    if (i + 1 < nodes.size()) {
      auto id = network.find_link(n, nodes[i + 1]);
      if (!id) {
        throw Error(ErrorCode::kInvalidPath,
                    "path " + path.to_string() + " uses missing link " +
                        std::to_string(n) + "->" + std::to_string(nodes[i + 1]));
      }
      out.push_back(*id);
    }
  }
  return out;
}

BlockageRealization BlockageRealization::of_links(std::size_t link_count,
                                                  std::span<const LinkId> blocked) {
  BlockageRealization out(link_count);
  for (LinkId id : blocked) out.block(id);
  return out;
}

std::size_t BlockageRealization::blocked_count() const {
  return static_cast<std::size_t>(std::count(blocked_.begin(), blocked_.end(), true));
}

std::vector<LinkId> BlockageRealization::blocked_links() const {
  std::vector<LinkId> out;
  for (std::size_t i = 0; i < blocked_.size(); ++i) {
    if (blocked_[i]) out.push_back(static_cast<LinkId>(i));
  }
  return out;
}

bool BlockageRealization::blocks_any(std::span<const LinkId> links) const {
  return std::any_of(links.begin(), links.end(),
                     [this](LinkId id) { return is_blocked(id); });
}

double path_capacity(const Network& network, const Path& path) {
  double c = std::numeric_limits<double>::infinity();
  for (LinkId id : path_links(network, path)) c = std::min(c, network.link(id).capacity);
  return c;
}

double path_success(const Network& network, const Path& path) {
  double s = 1.0;
  for (LinkId id : path_links(network, path)) s *= 1.0 - network.link(id).block_prob;
  return s;
}

namespace {

struct PathSearch {
  const Network& network;
  std::size_t max_paths;
  PathEnumeration result;
  std::vector<NodeId> stack;
  std::vector<bool> on_stack;

  // Returns false once the cap is hit.
  bool visit(NodeId node) {
    stack.push_back(node);
    on_stack[static_cast<std::size_t>(node)] = true;
    bool keep_going = true;
    if (node == network.destination()) {
      if (result.paths.size() >= max_paths) {
        result.truncated = true;
        keep_going = false;
      } else {
        result.paths.push_back(Path{stack});
      }
    } else {
      for (LinkId id : network.out_links(node)) {
        NodeId next = network.link(id).dst;
        if (on_stack[static_cast<std::size_t>(next)]) continue;
        if (!visit(next)) {
          keep_going = false;
          break;
        }
      }
    }
    on_stack[static_cast<std::size_t>(node)] = false;
    stack.pop_back();
    return keep_going;
  }
};

}  // namespace

PathEnumeration enumerate_paths(const Network& network, std::size_t max_paths) {
  if (max_paths < 1) throw Error(ErrorCode::kPrecondition, "max_paths must be at least 1");
  PathSearch search{network, max_paths, {}, {},
                    std::vector<bool>(static_cast<std::size_t>(network.node_count()), false)};
  search.visit(network.source());
  return std::move(search.result);
}

ScheduleVerdict validate_schedule(const Network& network, const Schedule& schedule) {
  const auto n = static_cast<std::size_t>(network.node_count());
  ScheduleVerdict verdict;
  verdict.transmit_utilization.assign(n, 0.0);
  verdict.receive_utilization.assign(n, 0.0);
  auto fail = [&verdict](std::string reason) {
    if (verdict.valid) verdict.reason = std::move(reason);
    verdict.valid = false;
  };

  for (const ScheduleEntry& entry : schedule) {
    const std::vector<LinkId> links = path_links(network, entry.path);
    const double x = entry.activation;
    if (!std::isfinite(x) || x < 0.0) {
      fail("path " + entry.path.to_string() + " has a negative activation");
      continue;
    }
    if (x == 0.0) continue;
    double cp = std::numeric_limits<double>::infinity();
    for (LinkId id : links) cp = std::min(cp, network.link(id).capacity);
    for (LinkId id : links) {
      const Link& l = network.link(id);
      if (l.capacity <= 0.0) {
        fail("path " + entry.path.to_string() + " is active over zero-capacity link " +
             std::to_string(l.src) + "->" + std::to_string(l.dst));
        continue;
      }
      const double f = x * cp / l.capacity;
      verdict.transmit_utilization[static_cast<std::size_t>(l.src)] += f;
      verdict.receive_utilization[static_cast<std::size_t>(l.dst)] += f;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (verdict.transmit_utilization[i] > 1.0 + kFeasibilityTol) {
      fail("node " + std::to_string(i) + " transmits more than 100% of the time");
    }
    if (verdict.receive_utilization[i] > 1.0 + kFeasibilityTol) {
      fail("node " + std::to_string(i) + " receives more than 100% of the time");
    }
  }
  return verdict;
}

double delivered_rate(const Network& network, const Schedule& schedule,
                      const BlockageRealization& blockage) {
  double total = 0.0;
  for (const ScheduleEntry& entry : schedule) {
    if (entry.activation <= 0.0) continue;
    const std::vector<LinkId> links = path_links(network, entry.path);
    if (blockage.blocks_any(links)) continue;
    double cp = std::numeric_limits<double>::infinity();
    for (LinkId id : links) cp = std::min(cp, network.link(id).capacity);
    total += entry.activation * cp;
  }
  return total;
}

}  // namespace mmsched
