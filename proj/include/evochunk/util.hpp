#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evochunk {

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view s);

// Flat "key = value" config lines; '#' comments and blank lines are skipped.
// Malformed lines raise std::runtime_error with the line number.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in);

std::string to_lower_ascii(std::string_view s);

// Code-point aware prefix/suffix of up to n characters (UTF-8).
std::string utf8_prefix(std::string_view s, int n);
std::string utf8_suffix(std::string_view s, int n);

// Run-compressed word shape: "Their" -> "Xx", "10-year" -> "d-x".
std::string word_shape(std::string_view s);

bool parse_int(std::string_view s, int& out);
bool parse_double(std::string_view s, double& out);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace evochunk
