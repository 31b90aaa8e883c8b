// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "mmsched/env_server.h"
#include "mmsched/experiment.h"
#include "mmsched/net_gen.h"
#include "mmsched/network_io.h"
#include "mmsched/path_select.h"
#include "mmsched/rate_opt.h"
#include "mmsched/sched_env.h"
#include "support.h"

using namespace mmsched;
using testsupport::path;
namespace fs = std::filesystem;

namespace {

// Collects the first failure message of a criterion.
struct Check {
  std::string failure;
  void expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << ", want " << want << " +/- " << tol;
    expect(std::abs(got - want) <= tol, s.str());
  }
};

std::vector<Path> all_paths(const Network& n) { return enumerate_paths(n).paths; }

Check worst_case_ladder() {
  Check c;
  const Network n = testsupport::ladder5();
  const auto ps = all_paths(n);
  const auto start = std::chrono::steady_clock::now();
  const RateSolution s = optimal_worst_case(n, ps, 1);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(s.optimal(), "solver status");
  c.near(s.value, 400.0 / 41, 1e-6, "worst-case rate");
  double x4 = 0, x5 = 0;
  for (const auto& e : s.schedule) {
    if (e.path == path({0, 4, 6})) x4 = e.activation;
    if (e.path == path({0, 5, 6})) x5 = e.activation;
  }
  const bool textbook = std::abs(x4 - 25.0 / 41) < 1e-6 && std::abs(x5 - 16.0 / 41) < 1e-6;
  const bool alternative = validate_schedule(n, s.schedule).valid &&
                           std::abs(testsupport::brute_worst_case(n, s.schedule, 1) - 400.0 / 41) < 1e-6;
  c.expect(textbook || alternative, "activation times");
  c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s");
  return c;
}

Check average_ladder() {
  Check c;
  const Network n = testsupport::ladder5_blockage();
  const auto ps = all_paths(n);
  c.near(plain_lp_average_rate(n, ps), 5.0 / 9, 1e-6, "plain LP average");
  c.near(optimal_average(n, ps).value, 3.24, 1e-6, "optimal average");
  return c;
}

Check overlapping_optimum() {
  Check c;
  const Network worst = testsupport::overlap13();
  c.near(optimal_worst_case(worst, all_paths(worst), 1).value, 1.2, 1e-6, "worst-case k=1");
  const Network avg = testsupport::overlap13(1.0, 0.2, 1.0 / 3);
  c.near(optimal_average(avg, all_paths(avg)).value, 0.39, 0.005, "average variant");
  return c;
}

Check three_hop_average() {
  Check c;
  const Network n(12, {{0, 2, 1, 0.2}, {2, 3, 1, 0.2}, {3, 13, 1, 0.2}});
  const Path p = path({0, 2, 3, 13});
  // Exact product over success fractions (5-1)/5 in integers.
  long num = 1, den = 1;
  for (int hop = 0; hop < 3; ++hop) {
    num *= 5 - 1;
    den *= 5;
  }
  c.expect(num == 64 && den == 125, "integer product");
  const double lib = path_success(n, p) * path_capacity(n, p);
  const double ulp = std::nextafter(64.0 / 125, 1.0) - 64.0 / 125;
  c.near(lib, 64.0 / 125, 2 * ulp, "product formula");
  const std::vector<Path> ps{p};
  c.near(optimal_average(n, ps).value, 64.0 / 125, 1e-12, "single-path LP");
  return c;
}

Check variance_comparison() {
  Check c;
  const Network n = testsupport::overlap13_uniform();
  const Schedule single{{path({0, 1, 2, 3, 4, 5, 13}), 1.0}};
  const auto [mean, var] = testsupport::brute_moments(n, single);
  c.near(mean, 0.524, 1e-6, "mean");
  c.near(mean, 0.524288, 1e-6, "mean (exact)");
  c.near(var, 0.7737, 1e-4, "single-path variance");
  Schedule four;
  for (const Path& p : all_paths(n)) four.push_back({p, 0.25});
  c.expect(four.size() == 4 && validate_schedule(n, four).valid, "four-path schedule");
  c.near(testsupport::brute_moments(n, four).second, 0.38, 0.01, "four-path variance");
  const RateMoments lib = rate_moments(n, four);
  c.near(lib.variance, testsupport::brute_moments(n, four).second, 1e-12, "library variance");
  return c;
}

Check greedy_gap() {
  Check c;
  const Network n = testsupport::greedy_trap();
  const auto chosen = select_paths(n);
  c.expect(chosen == std::vector<Path>{path({0, 2, 3, 4})}, "selected set");
  if (!chosen.empty()) {
    c.near(path_capacity(n, chosen[0]) * path_success(n, chosen[0]), 0.5, 1e-12, "greedy rate");
  }
  double best = 0;
  for (const Path& p : all_paths(n)) best = std::max(best, path_capacity(n, p) * path_success(n, p));
  c.near(best, 1.0, 1e-12, "enumeration optimum");
  return c;
}

Check active_path_bound() {
  Check c;
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200 && c.failure.empty(); ++trial) {
    const Network n = testsupport::random_network(rng, {});
    const RateSolution s = optimal_average(n, all_paths(n));
    const std::size_t limit = static_cast<std::size_t>(2 * n.relay_count() + 2);
    c.expect(s.optimal() && s.active().size() <= limit,
             "network " + std::to_string(trial) + ": " + std::to_string(s.active().size()) +
                 " active paths");
  }
  return c;
}

Check equal_capacity_disjoint() {
  Check c;
  std::mt19937_64 rng(202);
  testsupport::RandomNetworkOptions o;
  o.equal_capacity = true;
  o.capacity = 2.0;
  o.max_relays = 7;
  o.max_paths = 200;
  for (int trial = 0; trial < 100 && c.failure.empty(); ++trial) {
    const Network n = testsupport::random_network(rng, o);
    const auto ps = all_paths(n);
    for (int k = 0; k <= 2 && k <= static_cast<int>(n.link_count()); ++k) {
      const std::string tag = "network " + std::to_string(trial) + " k=" + std::to_string(k);
      const EdgeDisjointSolution d = edge_disjoint_worst_case(n, ps, k);
      std::set<LinkId> used;
      bool disjoint = true;
      for (const auto& e : d.schedule) {
        if (e.activation <= 1e-12) continue;
        for (LinkId l : path_links(n, e.path)) disjoint = used.insert(l).second && disjoint;
      }
      c.expect(disjoint, tag + ": overlapping paths");
      c.expect(validate_schedule(n, d.schedule).valid &&
                   testsupport::brute_feasible(n, d.schedule, 1e-9),
               tag + ": infeasible");
      const double lp = optimal_worst_case(n, ps, k).value;
      c.near(testsupport::brute_worst_case(n, d.schedule, k), lp, 1e-7, tag + ": worst case");
    }
  }
  return c;
}

Check lp_oracle() {
  Check c;
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 500 && c.failure.empty(); ++trial) {
    const LinearProgram lp = testsupport::random_lp(rng);
    const auto oracle = testsupport::vertex_enumeration(lp);
    const LpSolution sol = solve_lp(lp);
    const std::string tag = "program " + std::to_string(trial);
    if (!oracle.feasible) {
      c.expect(sol.status == LpStatus::kInfeasible, tag + ": expected infeasible");
      continue;
    }
    c.expect(sol.status == LpStatus::kOptimal, tag + ": expected optimal");
    c.near(sol.objective, oracle.objective, 1e-7, tag);
  }
  return c;
}

std::vector<std::string> replay_golden(const fs::path& dir, std::vector<std::string>* expected) {
  std::ifstream in(dir / "transcript.jsonl");
  EnvSetup setup = load_env_setup(dir / "env.json");
  ServerSession session(std::make_unique<SchedulingEnv>(setup.env, setup.reselector));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("> ", 0) == 0) out.push_back(session.handle_line(line.substr(2)));
    if (expected && line.rfind("< ", 0) == 0) expected->push_back(line.substr(2));
  }
  return out;
}

Check environment_contract() {
  Check c;
  // Fixed points and reward rule under random actions.
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EnvConfig cfg;
    cfg.network = testsupport::ladder5_blockage();
    cfg.paths = all_paths(cfg.network);
    cfg.r_star = 2.5;
    cfg.horizon = 100;
    cfg.seed = seed;
    SchedulingEnv env(cfg);
    env.reset(static_cast<int>(seed));
    c.expect(env.is_valid(env.state()), "zero state invalid");
    while (!env.done()) {
      std::vector<double> a(env.path_count());
      for (double& x : a) x = u(rng);
      const std::vector<double> before = env.state();
      const StepOutcome s = env.step(a);
      if (!s.accepted) c.expect(s.state == before, "rejected step moved the state");
      c.expect(env.is_valid(s.state), "emitted state invalid");
      const bool success = s.delivered_rate >= cfg.r_star;
      c.expect((s.reward == 1.0) == success, "reward 1 without success or vice versa");
      if (!success) c.expect(s.reward == std::exp(s.delivered_rate) / cfg.kappa, "shaped reward");
      c.expect(s.done == (success || env.time_step() >= cfg.horizon), "done flag");
    }
  }
  // Blockage refreshes exactly at epoch boundaries.
  EnvConfig cfg;
  cfg.network = testsupport::overlap13_uniform();
  cfg.paths = all_paths(cfg.network);
  cfg.r_star = 1.0;
  cfg.seed = 5;
  SchedulingEnv env(cfg);
  int refreshes = 0;
  for (int e = 1; e < 200; ++e) {
    const bool same = env.conditions(e).blockage == env.conditions(e - 1).blockage;
    if (e % cfg.epoch_length != 0) c.expect(same, "blockage changed inside an epoch");
    refreshes += !same;
  }
  c.expect(refreshes > 10, "blockage never refreshed");
  // Protocol fuzz: one single-line, parseable reply per input line.
  ServerSession session(std::make_unique<SchedulingEnv>(cfg));
  std::uniform_int_distribution<int> byte(1, 255);
  std::uniform_int_distribution<int> len(0, 60);
  for (int i = 0; i < 2000; ++i) {
    std::string line = i % 3 == 0 ? R"({"type":"hello"})" : "";
    for (int j = len(rng); j > 0; --j) {
      const char ch = static_cast<char>(byte(rng));
      if (ch != '\n') line += ch;
    }
    const std::string reply = session.handle_line(line);
    c.expect(!reply.empty() && reply.find('\n') == std::string::npos, "malformed reply");
  }
  // Transcript determinism against the checked-in golden file.
  std::vector<std::string> expected;
  const auto first = replay_golden(MMSCHED_GOLDEN_DIR, &expected);
  const auto second = replay_golden(MMSCHED_GOLDEN_DIR, nullptr);
  c.expect(first == second, "replay differs between runs");
  c.expect(first == expected, "replay differs from the golden transcript");
  return c;
}

std::vector<double> csv_column(const fs::path& file, std::size_t col) {
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::stringstream s(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) std::getline(s, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

Schedule read_schedule(const fs::path& file, const std::vector<Path>& paths) {
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  Schedule s;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    s.push_back({paths.at(std::stoul(line.substr(0, comma))), std::stod(line.substr(comma + 1))});
  }
  return s;
}

void check_instance_baselines(Check& c, const ExperimentConfig& cfg, const InstanceSummary& sum,
                              const fs::path& inst, int& hit_epochs) {
  c.expect(sum.path_count >= 1000, "instance has fewer than 1000 paths");
  const std::vector<Path> paths = load_paths(inst / "paths_all.json");
  const EnvSetup setup = load_env_setup(inst / "env_pk.json");
  EnvConfig all = setup.env;
  all.paths = paths;
  const SchedulingEnv env(all);
  const double threshold = cfg.r_star_fraction * sum.approx_capacity;
  for (const char* name : {"1", "2"}) {
    const Schedule sched =
        read_schedule(inst / (std::string("schedule_baseline") + name + ".csv"), paths);
    const auto series = csv_column(inst / (std::string("baseline") + name + ".csv"), 2);
    c.expect(series.size() == static_cast<std::size_t>(cfg.episodes), "series length");
    for (std::size_t e = 0; e < series.size(); ++e) {
      const EpisodeConditions cond = env.conditions(static_cast<int>(e));
      const double want = delivered_rate(cond.network, sched, cond.blockage);
      c.near(series[e], want, 1e-9 * (1 + want), std::string("baseline ") + name + " episode " +
                                                   std::to_string(e) + " delivered rate");
      bool blocked = false;
      for (const auto& entry : sched) {
        if (entry.activation > 1e-9 && cond.blockage.blocks_any(path_links(env.config().network, entry.path))) {
          blocked = true;
        }
      }
      if (blocked) {
        ++hit_epochs;
        c.expect(series[e] < threshold, std::string("baseline ") + name + " episode " +
                                            std::to_string(e) + " not below 0.7 C");
      }
    }
  }
}

Check baseline_reproduction() {
  Check c;
  const ExperimentConfig cfg = parse_experiment_config("{}");
  const fs::path dir = fs::temp_directory_path() / "mmsched_acceptance_baselines";
  fs::remove_all(dir);
  const ExperimentResult r = run_experiment(cfg, 2, dir);
  int hit_epochs = 0;
  for (const InstanceSummary& sum : r.instances) {
    const fs::path inst = dir / ("instance_" + std::to_string(sum.index));
    check_instance_baselines(c, cfg, sum, inst, hit_epochs);
  }
  c.expect(hit_epochs > 0, "no epoch blocked an active path");
  fs::remove_all(dir);
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"worst-case schedule on the five-relay ladder (k=1, under 1 s)", worst_case_ladder},
      {"plain and optimal average rate on the blockage ladder", average_ladder},
      {"overlapping-path optimum: worst case 1.2, average about 0.39", overlapping_optimum},
      {"three-hop unit path average rate 64/125", three_hop_average},
      {"rate mean and variance: single path vs four overlapping paths", variance_comparison},
      {"greedy selection picks the suboptimal route (0.5 vs 1.0)", greedy_gap},
      {"average optimum uses at most 2N+2 paths on 200 random networks", active_path_bound},
      {"equal capacities: disjoint-path schedule matches the worst-case LP", equal_capacity_disjoint},
      {"simplex agrees with vertex enumeration on 500 random LPs", lp_oracle},
      {"environment contract: fixed points, rewards, epochs, fuzz, transcript", environment_contract},
      {"static baselines drop below 0.7 C whenever an active path is blocked", baseline_reproduction},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Check result;
    try {
      result = run();
    } catch (const std::exception& e) {
      result.failure = std::string("exception: ") + e.what();
    }
    if (result.failure.empty()) {
      std::printf("PASS  %s\n", name.c_str());
    } else {
      ++failures;
      std::printf("FAIL  %s: %s\n", name.c_str(), result.failure.c_str());
    }
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
