#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdrmob/civil_time.hpp"
#include "cdrmob/csv.hpp"
#include "cdrmob/errors.hpp"

namespace cdrmob {

// Plain-text "key = value" configuration file. '#' starts a comment, blank
// lines are ignored, keys may repeat (order preserved).
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile load(const std::string& path) {
    return parse_text(read_file(path), path);
  }

  static KeyValueFile parse_text(std::string_view text,
                                 std::string source = "<text>") {
    KeyValueFile kv;
    kv.source_ = std::move(source);
    for_each_line(text, [&](std::uint64_t line_no, std::string_view line) {
      const std::size_t hash = line.find('#');
      if (hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) return;
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(kv.source_ + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
      kv.entries_.emplace_back(std::string(trim(line.substr(0, eq))),
                               std::string(trim(line.substr(eq + 1))));
    });
    return kv;
  }

  bool has(std::string_view key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return true;
    return false;
  }

  std::optional<std::string> find(std::string_view key) const {
    std::optional<std::string> out;
    for (const auto& [k, v] : entries_)
      if (k == key) out = v;  // last occurrence wins
    return out;
  }

  std::string get(std::string_view key) const {
    auto v = find(key);
    if (!v) throw ConfigError(source_ + ": missing key '" + std::string(key) + "'");
    return *v;
  }

  std::string get_or(std::string_view key, std::string_view dflt) const {
    auto v = find(key);
    return v ? *v : std::string(dflt);
  }

  std::vector<std::string> get_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
      if (k == key) out.push_back(v);
    return out;
  }

  double get_double(std::string_view key) const {
    return to_double(key, get(key));
  }
  double get_double_or(std::string_view key, double dflt) const {
    auto v = find(key);
    return v ? to_double(key, *v) : dflt;
  }

  std::int64_t get_i64(std::string_view key) const {
    return to_i64(key, get(key));
  }
  std::int64_t get_i64_or(std::string_view key, std::int64_t dflt) const {
    auto v = find(key);
    return v ? to_i64(key, *v) : dflt;
  }

  std::uint64_t get_u64_or(std::string_view key, std::uint64_t dflt) const {
    auto v = find(key);
    if (!v) return dflt;
    auto parsed = parse_u64(trim(*v));
    if (!parsed) throw ConfigError(bad(key, *v));
    return *parsed;
  }

  EpochSeconds get_datetime(std::string_view key) const {
    const std::string v = get(key);
    if (auto t = parse_iso_datetime(v)) return *t;
    if (auto d = parse_iso_date(v)) return seconds_at(*d);
    throw ConfigError(bad(key, v));
  }

  CivilDate get_date(std::string_view key) const {
    const std::string v = get(key);
    if (auto d = parse_iso_date(v)) return *d;
    throw ConfigError(bad(key, v));
  }

  // Comma-separated list; empty value yields an empty list.
  std::vector<std::string> get_list_or(std::string_view key) const {
    std::vector<std::string> out;
    auto v = find(key);
    if (!v) return out;
    std::string_view rest = *v;
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      std::string_view item = trim(rest.substr(0, comma));
      if (!item.empty()) out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  const std::string& source() const { return source_; }

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
      s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
      s.remove_suffix(1);
    return s;
  }

 private:
  std::string bad(std::string_view key, const std::string& v) const {
    return source_ + ": bad value for '" + std::string(key) + "': " + v;
  }
  double to_double(std::string_view key, const std::string& v) const {
    auto parsed = parse_double(trim(v));
    if (!parsed) throw ConfigError(bad(key, v));
    return *parsed;
  }
  std::int64_t to_i64(std::string_view key, const std::string& v) const {
    auto parsed = parse_i64(trim(v));
    if (!parsed) throw ConfigError(bad(key, v));
    return *parsed;
  }

  std::string source_ = "<empty>";
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace cdrmob
