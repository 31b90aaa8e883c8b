#include "mmsched/experiment.h"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mmsched/error.h"
#include "mmsched/network_io.h"
#include "mmsched/path_select.h"
#include "mmsched/rate_opt.h"

namespace mmsched {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

json parse_document(std::string_view text, std::string_view source_name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n');
    throw Error(ErrorCode::kParse,
                std::string(source_name) + ":" + std::to_string(line) + ": " + e.what());
  }
}

// Reads typed fields out of one JSON object and rejects unknown keys.
class Section {
 public:
  Section(const json& obj, std::string name) : obj_(obj), name_(std::move(name)) {
    if (!obj_.is_object()) fail("must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key) || obj_[key].is_null()) return;
    const json& v = obj_[key];
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(std::string("'") + key + "' must be a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(std::string("'") + key + "' must be an integer");
      if (std::is_unsigned_v<T> && !v.is_number_unsigned()) {
        fail(std::string("'") + key + "' must be nonnegative");
      }
      out = v.get<T>();
    } else {
      if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
      out = v.get<T>();
    }
  }

  void read_optional(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!obj_.contains(key) || obj_[key].is_null()) return;
    if (!obj_[key].is_number()) fail(std::string("'") + key + "' must be a number");
    out = obj_[key].get<double>();
  }

  void read_range(const char* key, double& lo, double& hi) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    const json& v = obj_[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(std::string("'") + key + "' must be a [min, max] pair");
    }
    lo = v[0].get<double>();
    hi = v[1].get<double>();
  }

  void mark(const char* key) { seen_.insert(key); }
  bool has(const char* key) const { return obj_.contains(key) && !obj_[key].is_null(); }
  const json& sub(const char* key) {
    seen_.insert(key);
    return obj_[key];
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key) && !value.is_null()) fail("unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kConfig, name_ + ": " + what);
  }

 private:
  const json& obj_;
  std::string name_;
  std::set<std::string> seen_;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string metrics_to_string(std::span<const MetricRow> rows) {
  std::ostringstream out;
  write_metrics_csv(out, rows);
  return out.str();
}

std::string schedule_to_string(const Schedule& schedule) {
  std::ostringstream out;
  write_schedule_csv(out, schedule);
  return out.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  GenConfig g = generator;
  g.seed = 0;
  g.validate();
  if (instances < 1) throw Error(ErrorCode::kConfig, "instances must be >= 1");
  if (threads < 0) throw Error(ErrorCode::kConfig, "threads must be >= 0");
  if (episodes < 1) throw Error(ErrorCode::kConfig, "episodes must be >= 1");
  if (horizon < 1) throw Error(ErrorCode::kConfig, "horizon must be >= 1");
  if (epoch_length < 1) throw Error(ErrorCode::kConfig, "epoch_length must be >= 1");
  if (!(r_star_fraction > 0.0 && r_star_fraction <= 1.0)) {
    throw Error(ErrorCode::kConfig, "r_star_fraction must lie in (0, 1]");
  }
  if (!(kappa > 0.0)) throw Error(ErrorCode::kConfig, "kappa must be positive");
  if (reselect_patience < 1) throw Error(ErrorCode::kConfig, "reselect_patience must be >= 1");
  if (!(capacity_stddev >= 0.0)) throw Error(ErrorCode::kConfig, "capacity_stddev must be >= 0");
  if (min_k < 1) throw Error(ErrorCode::kConfig, "min_k must be >= 1");
  if (lambda_sets < 1) throw Error(ErrorCode::kConfig, "lambda_sets must be >= 1");
  if (max_paths < 1) throw Error(ErrorCode::kConfig, "max_paths must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::kConfig, "epsilon must lie in [0, 1]");
  if (evaluation_rollouts < 1) throw Error(ErrorCode::kConfig, "evaluation_rollouts must be >= 1");
}

ExperimentConfig parse_experiment_config(std::string_view text, std::string_view source_name) {
  const json doc = parse_document(text, source_name);
  const std::string name(source_name);
  ExperimentConfig c;
  Section top(doc, name);
  top.read("instances", c.instances);
  top.read("threads", c.threads);

  if (top.has("generator")) {
    Section g(top.sub("generator"), name + ": generator");
    GenConfig& gc = c.generator;
    g.read("relay_count", gc.relay_count);
    g.read_range("coord_range", gc.coord_min, gc.coord_max);
    g.read_range("lambda_range", gc.lambda_min, gc.lambda_max);
    g.read("tau_b", gc.tau_b);
    g.read("rician_k_db", gc.rician_k_db);
    g.read_optional("reference_snr", gc.reference_snr);
    g.read("target_mean_capacity", gc.target_mean_capacity);
    g.read("min_path_count", gc.min_path_count);
    g.read("path_count_cap", gc.path_count_cap);
    g.read("min_distance", gc.min_distance);
    g.finish();
  }

  bool patience_given = false;
  if (top.has("environment")) {
    Section e(top.sub("environment"), name + ": environment");
    e.read("episodes", c.episodes);
    e.read("horizon", c.horizon);
    e.read("epoch_length", c.epoch_length);
    e.read("r_star_fraction", c.r_star_fraction);
    e.read("kappa", c.kappa);
    patience_given = e.has("reselect_patience");
    e.read("reselect_patience", c.reselect_patience);
    e.read("time_varying", c.time_varying);
    e.read("capacity_stddev", c.capacity_stddev);
    e.finish();
  }
  if (!patience_given) c.reselect_patience = 5 * c.horizon;

  if (top.has("selection")) {
    Section s(top.sub("selection"), name + ": selection");
    s.read("min_k", c.min_k);
    s.read("lambda_sets", c.lambda_sets);
    s.read("max_paths", c.max_paths);
    s.finish();
  }

  if (top.has("agent")) {
    Section a(top.sub("agent"), name + ": agent");
    a.read("epsilon", c.epsilon);
    a.read("evaluation_rollouts", c.evaluation_rollouts);
    a.finish();
  }
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
  return parse_experiment_config(read_file(file), file.string());
}

std::string experiment_config_to_string(const ExperimentConfig& c) {
  const GenConfig& g = c.generator;
  ordered_json doc;
  doc["instances"] = c.instances;
  doc["threads"] = c.threads;
  doc["generator"] = {
      {"relay_count", g.relay_count},
      {"coord_range", {g.coord_min, g.coord_max}},
      {"lambda_range", {g.lambda_min, g.lambda_max}},
      {"tau_b", g.tau_b},
      {"rician_k_db", g.rician_k_db},
      {"reference_snr", g.reference_snr ? ordered_json(*g.reference_snr) : ordered_json()},
      {"target_mean_capacity", g.target_mean_capacity},
      {"min_path_count", g.min_path_count},
      {"path_count_cap", g.path_count_cap},
      {"min_distance", g.min_distance}};
  doc["environment"] = {{"episodes", c.episodes},
                        {"horizon", c.horizon},
                        {"epoch_length", c.epoch_length},
                        {"r_star_fraction", c.r_star_fraction},
                        {"kappa", c.kappa},
                        {"reselect_patience", c.reselect_patience},
                        {"time_varying", c.time_varying},
                        {"capacity_stddev", c.capacity_stddev}};
  doc["selection"] = {
      {"min_k", c.min_k}, {"lambda_sets", c.lambda_sets}, {"max_paths", c.max_paths}};
  doc["agent"] = {{"epsilon", c.epsilon}, {"evaluation_rollouts", c.evaluation_rollouts}};
  return doc.dump(2) + "\n";
}

std::string fnv1a_digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return hex64(h);
}

Reselector make_reselector(ReselectSettings settings, std::uint64_t seed, bool time_varying,
                           double capacity_stddev) {
  return [settings, seed, time_varying, capacity_stddev](const Network& network, int episode,
                                                         int count) {
    const std::uint64_t base =
        derive_seed(seed, "reselect", static_cast<std::uint64_t>(count) * 1'000'003u +
                                          static_cast<std::uint64_t>(episode));
    std::vector<std::vector<double>> sets;
    for (int i = 0; i < settings.lambda_sets; ++i) {
      sets.push_back(sample_lambdas(network, settings.lambda_min, settings.lambda_max,
                                    derive_seed(base, "lambda", static_cast<std::uint64_t>(i))));
    }
    LambdaVariantOptions vo;
    vo.tau_b = settings.tau_b;
    vo.resample_capacities = time_varying;
    vo.capacity_stddev = capacity_stddev;
    vo.seed = base;
    const std::vector<Network> variants = lambda_variants(network, sets, vo);
    CandidateOptions co;
    co.min_paths = settings.min_k;
    const PathEnumeration all = enumerate_paths(network);
    return build_candidate_paths(variants, co, all.paths).paths;
  };
}

namespace {

struct InstanceOutput {
  InstanceSummary summary;
  std::vector<std::string> files;  // relative to out_dir
};

InstanceOutput run_instance(const ExperimentConfig& config, int index, std::uint64_t seed,
                            const std::filesystem::path& out_dir) {
  InstanceOutput result;
  InstanceSummary& s = result.summary;
  s.index = index;
  s.seed = seed;

  const std::string dir_name = "instance_" + std::to_string(index);
  const std::filesystem::path dir = out_dir / dir_name;
  auto emit = [&](const std::string& name, std::string_view contents) {
    write_file(dir / name, contents);
    result.files.push_back(dir_name + "/" + name);
  };

  GenConfig gen = config.generator;
  gen.seed = derive_seed(seed, "generator");
  const GeneratedNetwork generated = generate_topology(gen);
  s.path_count_warning = generated.path_count_warning;
  const std::vector<double> lambda = sample_lambdas(generated.network, gen.lambda_min,
                                                    gen.lambda_max, derive_seed(seed, "lambda", 0));
  const Network network = assign_blockage(generated.network, lambda, gen.tau_b);
  s.link_count = network.link_count();

  const PathEnumeration all = enumerate_paths(network, config.max_paths);
  s.path_count = all.paths.size();
  s.paths_truncated = all.truncated;

  const RateSolution capacity = approx_capacity(network, all.paths);
  s.approx_capacity = capacity.value;
  s.r_star = config.r_star_fraction * capacity.value;

  std::vector<std::vector<double>> sets{lambda};
  for (int i = 1; i < config.lambda_sets; ++i) {
    sets.push_back(sample_lambdas(generated.network, gen.lambda_min, gen.lambda_max,
                                  derive_seed(seed, "lambda", static_cast<std::uint64_t>(i))));
  }
  LambdaVariantOptions vo;
  vo.tau_b = gen.tau_b;
  vo.resample_capacities = config.time_varying;
  vo.capacity_stddev = config.capacity_stddev;
  vo.seed = derive_seed(seed, "variants");
  const std::vector<Network> variants = lambda_variants(generated.network, sets, vo);
  CandidateOptions co;
  co.min_paths = config.min_k;
  const CandidatePaths pk = build_candidate_paths(variants, co, all.paths);
  s.pk_size = pk.paths.size();
  s.pk_shortfall = pk.shortfall;
  const PathPick hc = pick_hc_paths(network, all.paths, pk.paths.size());
  const PathPick rs = pick_rs_paths(all.paths, pk.paths.size(), derive_seed(seed, "random-paths"));
  s.hc_shortfall = hc.shortfall;
  s.rs_shortfall = rs.shortfall;

  emit("network.json", network_to_string(network));
  emit("paths_all.json", paths_to_string(all.paths));
  emit("paths_pk.json", paths_to_string(pk.paths));
  emit("paths_hc.json", paths_to_string(hc.paths));
  emit("paths_rs.json", paths_to_string(rs.paths));

  const std::uint64_t env_seed = derive_seed(seed, "environment");
  EnvConfig env_config;
  env_config.network = network;
  env_config.paths = pk.paths;
  env_config.r_star = s.r_star;
  env_config.horizon = config.horizon;
  env_config.kappa = config.kappa;
  env_config.epoch_length = config.epoch_length;
  env_config.time_varying = config.time_varying;
  env_config.capacity_stddev = config.capacity_stddev;
  env_config.reselect_patience = config.reselect_patience;
  env_config.seed = env_seed;
  if (config.time_varying) {
    env_config.r_star_fraction = config.r_star_fraction;
    env_config.capacity_paths = all.paths;
  }

  for (const char* variant : {"pk", "hc", "rs"}) {
    ordered_json doc;
    doc["network"] = "network.json";
    doc["paths"] = std::string("paths_") + variant + ".json";
    doc["r_star"] = s.r_star;
    doc["horizon"] = config.horizon;
    doc["kappa"] = config.kappa;
    doc["epoch_length"] = config.epoch_length;
    doc["time_varying"] = config.time_varying;
    doc["capacity_stddev"] = config.capacity_stddev;
    doc["reselect_patience"] = config.reselect_patience;
    doc["seed"] = env_seed;
    if (config.time_varying) {
      doc["r_star_fraction"] = config.r_star_fraction;
      doc["capacity_paths"] = "paths_all.json";
    }
    if (std::string_view(variant) == "pk") {
      doc["reselect"] = {{"lambda_sets", config.lambda_sets},
                         {"min_k", config.min_k},
                         {"lambda_range", {gen.lambda_min, gen.lambda_max}},
                         {"tau_b", gen.tau_b}};
    }
    doc["agent"] = {{"episodes", config.episodes},
                    {"epsilon", config.epsilon},
                    {"evaluation_rollouts", config.evaluation_rollouts}};
    emit(std::string("env_") + variant + ".json", doc.dump(2) + "\n");
  }

  const SchedulingEnv env(env_config);
  const RateSolution feasible = feasibility_schedule(network, all.paths, s.r_star);
  if (!feasible.optimal()) {
    throw Error(ErrorCode::kInternal, "R* is not reachable on instance " + std::to_string(index));
  }
  const std::vector<double> b1 = run_baseline_static(env, capacity.schedule, config.episodes);
  const std::vector<double> b2 = run_baseline_static(env, feasible.schedule, config.episodes);

  std::vector<std::vector<LinkId>> all_links;
  for (const Path& p : all.paths) all_links.push_back(path_links(network, p));
  std::vector<MetricRow> rows1;
  std::vector<MetricRow> rows2;
  for (int e = 0; e < config.episodes; ++e) {
    const EpisodeConditions c = env.conditions(e);
    std::size_t blocked = 0;
    for (const auto& ids : all_links) {
      if (c.blockage.blocks_any(ids)) ++blocked;
    }
    const double pct = all_links.empty() ? 0.0
                                         : 100.0 * static_cast<double>(blocked) /
                                               static_cast<double>(all_links.size());
    const auto i = static_cast<std::size_t>(e);
    rows1.push_back({e, b1[i], b1[i], c.r_star, pct});
    rows2.push_back({e, b2[i], b2[i], c.r_star, pct});
  }
  emit("baseline1.csv", metrics_to_string(rows1));
  emit("baseline2.csv", metrics_to_string(rows2));
  emit("schedule_baseline1.csv", schedule_to_string(capacity.schedule));
  emit("schedule_baseline2.csv", schedule_to_string(feasible.schedule));

  ordered_json summary;
  summary["seed"] = s.seed;
  summary["links"] = s.link_count;
  summary["paths"] = s.path_count;
  summary["paths_truncated"] = s.paths_truncated;
  summary["path_count_warning"] = s.path_count_warning;
  summary["reference_snr"] = generated.reference_snr;
  summary["approx_capacity"] = s.approx_capacity;
  summary["r_star"] = s.r_star;
  summary["pk_size"] = s.pk_size;
  summary["pk_shortfall"] = s.pk_shortfall;
  summary["hc_shortfall"] = s.hc_shortfall;
  summary["rs_shortfall"] = s.rs_shortfall;
  emit("summary.json", summary.dump(2) + "\n");
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                                const std::filesystem::path& out_dir) {
  config.validate();
  const std::string canonical = experiment_config_to_string(config);
  ExperimentResult result;
  result.config_digest = fnv1a_digest(canonical);

  const auto count = static_cast<std::size_t>(config.instances);
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = derive_seed(seed, "instance", i);

  std::vector<InstanceOutput> outputs(count);
  std::vector<std::exception_ptr> failures(count);
  std::size_t workers = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  std::mutex mutex;
  std::size_t next = 0;
  auto work = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mutex);
        if (next >= count) return;
        i = next++;
      }
      try {
        outputs[i] = run_instance(config, static_cast<int>(i), seeds[i], out_dir);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  write_file(out_dir / "config.json", canonical);
  std::vector<std::string> files{"config.json"};
  for (InstanceOutput& o : outputs) {
    result.instances.push_back(o.summary);
    files.insert(files.end(), o.files.begin(), o.files.end());
  }
  std::sort(files.begin(), files.end());

  ordered_json manifest;
  manifest["command"] = "experiment";
  manifest["config_digest"] = "fnv1a64:" + result.config_digest;
  manifest["seed"] = seed;
  manifest["instance_seeds"] = seeds;
  manifest["version"] = kToolkitVersion;
  manifest["outputs"] = files;
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  files.push_back("manifest.json");
  std::sort(files.begin(), files.end());
  result.outputs = std::move(files);
  return result;
}

EnvSetup load_env_setup(const std::filesystem::path& file) {
  const std::string text = read_file(file);
  const std::string name = file.string();
  const json doc = parse_document(text, name);
  const std::filesystem::path base = file.parent_path();
  Section top(doc, name);

  auto file_field = [&](const char* key) {
    std::string rel;
    const json& v = top.sub(key);
    if (!v.is_string()) top.fail(std::string("'") + key + "' must be a file name");
    rel = v.get<std::string>();
    return base / rel;
  };
  if (!top.has("network")) top.fail("missing 'network'");
  if (!top.has("paths")) top.fail("missing 'paths'");

  EnvSetup setup;
  EnvConfig& env = setup.env;
  env.network = load_network(file_field("network"));
  env.paths = load_paths(file_field("paths"));
  if (!top.has("r_star")) top.fail("missing 'r_star'");
  top.read("r_star", env.r_star);
  top.read("horizon", env.horizon);
  top.read("kappa", env.kappa);
  top.read("epoch_length", env.epoch_length);
  top.read("time_varying", env.time_varying);
  top.read("capacity_stddev", env.capacity_stddev);
  env.reselect_patience = 5 * env.horizon;
  top.read("reselect_patience", env.reselect_patience);
  top.read("seed", env.seed);
  top.read_optional("r_star_fraction", env.r_star_fraction);
  if (top.has("capacity_paths")) env.capacity_paths = load_paths(file_field("capacity_paths"));

  if (top.has("reselect")) {
    Section r(top.sub("reselect"), name + ": reselect");
    ReselectSettings rs;
    r.read("lambda_sets", rs.lambda_sets);
    r.read("min_k", rs.min_k);
    r.read_range("lambda_range", rs.lambda_min, rs.lambda_max);
    r.read("tau_b", rs.tau_b);
    r.finish();
    if (rs.lambda_sets < 1 || rs.min_k < 1 || !(rs.tau_b > 0.0) ||
        !(0.0 <= rs.lambda_min && rs.lambda_min <= rs.lambda_max)) {
      r.fail("invalid reselection settings");
    }
    setup.reselector = make_reselector(rs, derive_seed(env.seed, "reselect-stream"),
                                       env.time_varying, env.capacity_stddev);
  }
  top.mark("agent");  // consumed by the agent, not the environment
  top.finish();
  env.validate();
  return setup;
}

}  // namespace mmsched
