#pragma once

// Line-oriented "key = value" reader shared by the target and experiment
// file formats. '#' starts a comment; "[name]" lines open a section.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rfsl::detail {

struct KvLine {
  std::size_t line = 0;
  std::string section;  // non-empty for a "[section]" header line
  std::string key;
  std::string value;
};

std::vector<KvLine> read_kv_lines(std::string_view text, const std::string& source);
std::string read_file(const std::string& path);

std::vector<std::string> split_list(std::string_view value);
double parse_double(const std::string& text, const std::string& source, const KvLine& at);
std::size_t parse_size(const std::string& text, const std::string& source, const KvLine& at);
std::vector<double> parse_double_list(const KvLine& at, const std::string& source);
std::vector<std::size_t> parse_size_list(const KvLine& at, const std::string& source);

}  // namespace rfsl::detail
