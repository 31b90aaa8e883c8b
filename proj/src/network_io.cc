#include "mmsched/network_io.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mmsched/error.h"

namespace mmsched {

using nlohmann::json;

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse_json(std::string_view text, std::string_view source_name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte after the offending character.
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(ErrorCode::kParse, std::string(source_name) + ":" +
                                       std::to_string(line_of(text, byte)) + ": " + e.what());
  }
}

[[noreturn]] void schema_error(std::string_view source_name, const std::string& what) {
  throw Error(ErrorCode::kParse, std::string(source_name) + ": " + what);
}

double number_at(const json& arr, std::size_t i, std::string_view source_name,
                 const std::string& ctx) {
  if (i >= arr.size() || !arr[i].is_number()) {
    schema_error(source_name, ctx + ": expected a number at position " + std::to_string(i));
  }
  return arr[i].get<double>();
}

int int_at(const json& arr, std::size_t i, std::string_view source_name,
           const std::string& ctx) {
  if (i >= arr.size() || !arr[i].is_number_integer()) {
    schema_error(source_name, ctx + ": expected an integer at position " + std::to_string(i));
  }
  return arr[i].get<int>();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Network parse_network(std::string_view text, std::string_view source_name) {
  json doc = parse_json(text, source_name);
  if (!doc.is_object()) schema_error(source_name, "network document must be an object");
  if (!doc.contains("n_relays") || !doc["n_relays"].is_number_integer()) {
    schema_error(source_name, "missing integer field 'n_relays'");
  }
  const int n_relays = doc["n_relays"].get<int>();
  if (n_relays < 0) schema_error(source_name, "'n_relays' must be nonnegative");

  std::optional<std::vector<Point>> positions;
  if (doc.contains("nodes") && !doc["nodes"].is_null()) {
    const json& nodes = doc["nodes"];
    if (!nodes.is_array()) schema_error(source_name, "'nodes' must be an array");
    std::vector<Point> pts(static_cast<std::size_t>(n_relays + 2));
    std::vector<bool> seen(pts.size(), false);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::string ctx = "nodes[" + std::to_string(i) + "]";
      if (!nodes[i].is_array() || nodes[i].size() != 3) {
        schema_error(source_name, ctx + ": expected [id, x, y]");
      }
      int id = int_at(nodes[i], 0, source_name, ctx);
      if (id < 0 || id >= n_relays + 2) schema_error(source_name, ctx + ": node id out of range");
      if (seen[static_cast<std::size_t>(id)]) schema_error(source_name, ctx + ": duplicate node id");
      seen[static_cast<std::size_t>(id)] = true;
      pts[static_cast<std::size_t>(id)] = {number_at(nodes[i], 1, source_name, ctx),
                                           number_at(nodes[i], 2, source_name, ctx)};
    }
    if (!nodes.empty()) {
      if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        schema_error(source_name, "'nodes' must list every node exactly once");
      }
      positions = std::move(pts);
    }
  }

  if (!doc.contains("links") || !doc["links"].is_array()) {
    schema_error(source_name, "missing array field 'links'");
  }
  std::vector<Link> links;
  for (std::size_t i = 0; i < doc["links"].size(); ++i) {
    const json& l = doc["links"][i];
    const std::string ctx = "links[" + std::to_string(i) + "]";
    if (!l.is_array() || l.size() != 4) {
      schema_error(source_name, ctx + ": expected [src, dst, capacity, block_prob]");
    }
    links.push_back({int_at(l, 0, source_name, ctx), int_at(l, 1, source_name, ctx),
                     number_at(l, 2, source_name, ctx), number_at(l, 3, source_name, ctx)});
  }
  try {
    return Network(n_relays, std::move(links), std::move(positions));
  } catch (const Error& e) {
    schema_error(source_name, e.what());
  }
}

Network load_network(const std::filesystem::path& file) {
  return parse_network(read_file(file), file.string());
}

std::string network_to_string(const Network& network) {
  // Written by hand so every number carries 17 significant digits and each
  // link sits on its own line.
  std::ostringstream out;
  out << "{\n  \"n_relays\": " << network.relay_count() << ",\n";
  if (network.has_positions()) {
    out << "  \"nodes\": [";
    const auto& pos = network.positions();
    for (std::size_t i = 0; i < pos.size(); ++i) {
      out << (i == 0 ? "\n" : ",\n") << "    [" << i << ", " << format_double(pos[i].x)
          << ", " << format_double(pos[i].y) << "]";
    }
    out << "\n  ],\n";
  }
  out << "  \"links\": [";
  const auto links = network.links();
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    out << (i == 0 ? "\n" : ",\n") << "    [" << l.src << ", " << l.dst << ", "
        << format_double(l.capacity) << ", " << format_double(l.block_prob) << "]";
  }
  out << (links.empty() ? "]\n}\n" : "\n  ]\n}\n");
  return out.str();
}

void save_network(const Network& network, const std::filesystem::path& file) {
  write_file(file, network_to_string(network));
}

std::vector<Path> parse_paths(std::string_view text, std::string_view source_name) {
  json doc = parse_json(text, source_name);
  if (!doc.is_object() || !doc.contains("paths") || !doc["paths"].is_array()) {
    schema_error(source_name, "missing array field 'paths'");
  }
  std::vector<Path> out;
  for (std::size_t i = 0; i < doc["paths"].size(); ++i) {
    const json& p = doc["paths"][i];
    const std::string ctx = "paths[" + std::to_string(i) + "]";
    if (!p.is_array()) schema_error(source_name, ctx + ": expected a node list");
    Path path;
    for (std::size_t j = 0; j < p.size(); ++j) path.nodes.push_back(int_at(p, j, source_name, ctx));
    out.push_back(std::move(path));
  }
  return out;
}

std::vector<Path> load_paths(const std::filesystem::path& file) {
  return parse_paths(read_file(file), file.string());
}

std::string paths_to_string(std::span<const Path> paths) {
  std::ostringstream out;
  out << "{\n  \"paths\": [";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    out << (i == 0 ? "\n    [" : ",\n    [");
    for (std::size_t j = 0; j < paths[i].nodes.size(); ++j) {
      out << (j == 0 ? "" : ", ") << paths[i].nodes[j];
    }
    out << "]";
  }
  out << (paths.empty() ? "]\n}\n" : "\n  ]\n}\n");
  return out.str();
}

void save_paths(std::span<const Path> paths, const std::filesystem::path& file) {
  write_file(file, paths_to_string(paths));
}

void write_schedule_csv(std::ostream& out, const Schedule& schedule) {
  out << "path_id,x_p\n";
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].activation > 0.0) {
      out << i << "," << format_double(schedule[i].activation) << "\n";
    }
  }
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& file, std::string_view contents) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + file.string());
  out << contents;
}

}  // namespace mmsched
