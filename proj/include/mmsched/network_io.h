#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mmsched/network.h"

namespace mmsched {

// Network document:
//   {"n_relays": N,
//    "nodes": [[id, x, y], ...],          (optional)
//    "links": [[src, dst, capacity, block_prob], ...]}
// Parse failures throw Error(kParse) naming the source and line.
Network parse_network(std::string_view text, std::string_view source_name = "<input>");
Network load_network(const std::filesystem::path& file);
std::string network_to_string(const Network& network);
void save_network(const Network& network, const std::filesystem::path& file);

// Path list document: {"paths": [[0, 2, 3, 4], ...]}.
std::vector<Path> parse_paths(std::string_view text, std::string_view source_name = "<input>");
std::vector<Path> load_paths(const std::filesystem::path& file);
std::string paths_to_string(std::span<const Path> paths);
void save_paths(std::span<const Path> paths, const std::filesystem::path& file);

// Schedule table: header "path_id,x_p", one row per entry with a positive
// activation. path_id is the entry's index in the schedule.
void write_schedule_csv(std::ostream& out, const Schedule& schedule);

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view contents);

// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace mmsched
