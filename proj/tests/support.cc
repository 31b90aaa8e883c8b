#include "support.h"

#include <deque>
#include <limits>

namespace testsupport {

Network random_network(std::mt19937_64& rng, const RandomNetworkOptions& o) {
  std::uniform_int_distribution<int> relays_dist(o.min_relays, o.max_relays);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> cap_dist(1, 9);
  while (true) {
    const int n = relays_dist(rng);
    const int dst = n + 1;
    std::vector<Link> links;
    for (int a = 0; a <= n; ++a) {
      for (int b = 1; b <= dst; ++b) {
        if (a == b || u(rng) >= o.density) continue;
        Link l;
        l.src = a;
        l.dst = b;
        l.capacity = o.equal_capacity ? o.capacity : double(cap_dist(rng));
        l.block_prob = o.random_blockage ? std::floor(u(rng) * 10.0) / 10.0 : 0.0;
        links.push_back(l);
      }
    }
    Network net(n, links);
    const auto paths = mmsched::enumerate_paths(net, o.max_paths + 1);
    if (!paths.paths.empty() && paths.paths.size() <= o.max_paths) return net;
  }
}

mmsched::LinearProgram random_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_int_distribution<int> coef(-5, 5);
  std::uniform_int_distribution<int> rhs(-3, 10);
  const auto n = static_cast<std::size_t>(size(rng));
  const auto m = static_cast<std::size_t>(size(rng));
  mmsched::LinearProgram lp(n);
  for (double& c : lp.objective) c = coef(rng);
  lp.add_row(std::vector<double>(n, 1.0), 1 + rhs(rng) % 7 + 3);
  for (std::size_t i = 1; i < m; ++i) {
    std::vector<double> row(n);
    for (double& a : row) a = coef(rng);
    lp.add_row(row, rhs(rng));
  }
  return lp;
}

namespace {

// Solves M y = r in place; false when singular.
bool solve_square(std::vector<std::vector<double>> m, std::vector<double> r,
                  std::vector<double>& y) {
  const std::size_t n = r.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < n; ++i) {
      if (std::abs(m[i][c]) > std::abs(m[piv][c])) piv = i;
    }
    if (std::abs(m[piv][c]) < 1e-10) return false;
    std::swap(m[piv], m[c]);
    std::swap(r[piv], r[c]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c) continue;
      const double f = m[i][c] / m[c][c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
      r[i] -= f * r[c];
    }
  }
  y.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) y[i] = r[i] / m[i][i];
  return true;
}

}  // namespace

OracleLp vertex_enumeration(const mmsched::LinearProgram& lp) {
  const std::size_t n = lp.variable_count();
  const std::size_t m = lp.row_count();
  // Constraint k < m is row k; k >= m is -x_{k-m} <= 0.
  auto coeff = [&](std::size_t k, std::size_t j) {
    if (k < m) return lp.rows[k][j];
    return k - m == j ? -1.0 : 0.0;
  };
  auto bound = [&](std::size_t k) { return k < m ? lp.rhs[k] : 0.0; };
  const std::size_t total = m + n;

  OracleLp best;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  std::vector<double> x;
  while (true) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a[i][j] = coeff(pick[i], j);
      r[i] = bound(pick[i]);
    }
    if (solve_square(a, r, x)) {
      bool ok = true;
      for (std::size_t k = 0; k < total && ok; ++k) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) lhs += coeff(k, j) * x[j];
        if (lhs > bound(k) + 1e-9 * (1.0 + std::abs(bound(k)))) ok = false;
      }
      if (ok) {
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * x[j];
        if (!best.feasible || obj > best.objective) best.objective = obj;
        best.feasible = true;
      }
    }
    // Next n-combination of [0, total).
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == total - n + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

namespace {

std::vector<std::pair<int, int>> hops(const Path& p) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) out.emplace_back(p.nodes[i], p.nodes[i + 1]);
  return out;
}

double capacity_of(const Network& net, const Path& p) {
  double c = std::numeric_limits<double>::infinity();
  for (auto [a, b] : hops(p)) c = std::min(c, net.link(*net.find_link(a, b)).capacity);
  return c;
}

}  // namespace

double rate_with_blocked(const Network& net, const Schedule& s,
                         const std::set<std::pair<int, int>>& blocked) {
  double r = 0.0;
  for (const auto& e : s) {
    bool hit = false;
    for (const auto& h : hops(e.path)) hit = hit || blocked.contains(h);
    if (!hit) r += e.activation * capacity_of(net, e.path);
  }
  return r;
}

double brute_worst_case(const Network& net, const Schedule& s, int k) {
  const std::size_t L = net.link_count();
  double worst = std::numeric_limits<double>::infinity();
  if (k <= 0) return rate_with_blocked(net, s, {});
  if (static_cast<std::size_t>(k) > L) k = static_cast<int>(L);
  std::vector<std::size_t> pick(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  while (true) {
    std::set<std::pair<int, int>> blocked;
    for (std::size_t id : pick) {
      const Link& l = net.link(static_cast<LinkId>(id));
      blocked.emplace(l.src, l.dst);
    }
    worst = std::min(worst, rate_with_blocked(net, s, blocked));
    std::size_t i = pick.size();
    while (i > 0 && pick[i - 1] == L - pick.size() + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < pick.size(); ++j) pick[j] = pick[j - 1] + 1;
  }
  return worst;
}

std::pair<double, double> brute_moments(const Network& net, const Schedule& s) {
  const std::size_t L = net.link_count();
  double mean = 0.0;
  double second = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << L); ++mask) {
    double prob = 1.0;
    std::set<std::pair<int, int>> blocked;
    for (std::size_t e = 0; e < L; ++e) {
      const Link& l = net.link(static_cast<LinkId>(e));
      if (mask >> e & 1) {
        prob *= l.block_prob;
        blocked.emplace(l.src, l.dst);
      } else {
        prob *= 1.0 - l.block_prob;
      }
    }
    if (prob == 0.0) continue;
    const double r = rate_with_blocked(net, s, blocked);
    mean += prob * r;
    second += prob * r * r;
  }
  return {mean, second - mean * mean};
}

bool brute_feasible(const Network& net, const Schedule& s, double tol) {
  std::vector<double> tx(static_cast<std::size_t>(net.node_count()), 0.0);
  std::vector<double> rx(tx.size(), 0.0);
  for (const auto& e : s) {
    if (e.activation < -tol) return false;
    if (e.activation <= 0.0) continue;
    const double cp = capacity_of(net, e.path);
    for (auto [a, b] : hops(e.path)) {
      const double l = net.link(*net.find_link(a, b)).capacity;
      tx[static_cast<std::size_t>(a)] += e.activation * cp / l;
      rx[static_cast<std::size_t>(b)] += e.activation * cp / l;
    }
  }
  for (std::size_t v = 0; v < tx.size(); ++v) {
    if (tx[v] > 1.0 + tol || rx[v] > 1.0 + tol) return false;
  }
  return true;
}

std::vector<Path> brute_paths(const Network& net) {
  std::vector<Path> out;
  std::deque<std::vector<int>> queue{{0}};
  while (!queue.empty()) {
    std::vector<int> cur = queue.front();
    queue.pop_front();
    if (cur.back() == net.destination()) {
      out.push_back(Path{cur});
      continue;
    }
    for (const Link& l : net.links()) {
      if (l.src != cur.back()) continue;
      if (std::find(cur.begin(), cur.end(), l.dst) != cur.end()) continue;
      std::vector<int> next = cur;
      next.push_back(l.dst);
      queue.push_back(std::move(next));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace testsupport
