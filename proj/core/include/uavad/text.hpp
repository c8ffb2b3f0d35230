#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uavad {

// Shortest round-trip decimal form (std::to_chars). Every CSV and SVG
// writer goes through this so repeated runs emit byte-identical files.
std::string format_double(double v);

// Strict parsers; nullopt on trailing garbage or empty input.
// parse_double accepts "nan"/"inf" spellings (case-insensitive) since null
// markers in sensor exports are represented that way.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_csv_line(std::string_view line);

// Minimal fnmatch-style pattern: '*' matches any run, '?' one character.
bool glob_match(std::string_view pattern, std::string_view name);

}  // namespace uavad
