#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdrmob/errors.hpp"

namespace cdrmob {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::string data;
  in.seekg(0, std::ios::end);
  data.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  return data;
}

// Splits a line on commas into at most `max_out` fields. Returns the field
// count, or max_out + 1 if there were more. Fields are not unescaped: the
// formats used here never quote (ids and codes contain no commas).
inline std::size_t split_fields(std::string_view line, std::string_view* out,
                                std::size_t max_out) {
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (n == max_out) return max_out + 1;
    if (comma == std::string_view::npos) {
      out[n++] = line.substr(start);
      return n;
    }
    out[n++] = line.substr(start, comma - start);
    start = comma + 1;
  }
}

// Calls fn(line_no, line) for each line; line numbers start at 1.
// Trailing '\r' is stripped so CRLF files parse identically.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::uint64_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    pos = nl + 1;
  }
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_i64(std::string_view s) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  return v;
}

// Shortest representation that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Comment header carried by every emitted CSV: tool version, subcommand and
// the full parameter set, so a plot can be traced back to its run. No
// timestamps, so reruns stay byte-identical.
inline void write_provenance(
    std::ostream& os, std::string_view tool_version, std::string_view command,
    const std::vector<std::pair<std::string, std::string>>& params) {
  os << "# cdrmob " << tool_version << ' ' << command << '\n';
  for (const auto& [k, v] : params) os << "# " << k << '=' << v << '\n';
}

}  // namespace cdrmob
