#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace parsim {

/// One `key=value` entry with the line it came from.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Flat `key=value` text. Blank lines and `#` comments are ignored; keys and
/// values are trimmed. Throws ParseError on a line without '='.
std::vector<ConfigEntry> parse_key_values(std::string_view text);
std::vector<ConfigEntry> load_key_values(const std::string& path);

double parse_real(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);
std::vector<long long> parse_integer_list(std::string_view text, std::string_view what);

}  // namespace parsim
