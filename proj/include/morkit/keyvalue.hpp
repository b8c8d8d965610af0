#pragma once

// Minimal sectioned key = value text format used for recipes and CLI config.
//
//   # comment
//   [section]
//   key = value
//
// Keys outside any section belong to the "" section. Duplicate keys are an
// error, as is any key the consumer does not claim (see KeyValueReader).

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "morkit/error.hpp"

namespace morkit {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

/// Shortest decimal text that parses back to exactly `v`.
/// Shortest round-trip text in %g style, so 1e-4 prints as 0.0001.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view text, const std::string& what) {
  const std::string t = detail::trim(text);
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || t.empty()) {
    throw Error(what + ": expected a number, got '" + t + "'");
  }
  return v;
}

inline std::uint64_t parse_u64(std::string_view text, const std::string& what) {
  const std::string t = detail::trim(text);
  std::uint64_t v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || t.empty()) {
    throw Error(what + ": expected an unsigned integer, got '" + t + "'");
  }
  return v;
}

/// Comma- or whitespace-separated list of numbers.
inline std::vector<double> parse_double_list(std::string_view text, const std::string& what) {
  std::string t(text);
  for (char& c : t) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(t);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, what));
  return out;
}

class KeyValueFile {
 public:
  using Section = std::map<std::string, std::string>;

  static KeyValueFile parse(std::string_view text, const std::string& origin = "<text>") {
    KeyValueFile f;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      std::string line = detail::trim(raw);
      if (const auto hash = line.find('#'); hash != std::string::npos) line = detail::trim(line.substr(0, hash));
      if (line.empty()) continue;
      const std::string where = origin + ":" + std::to_string(line_no);
      if (line.front() == '[') {
        if (line.back() != ']') throw Error(where + ": malformed section header");
        section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
        f.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(where + ": expected key = value");
      const std::string key = detail::trim(std::string_view(line).substr(0, eq));
      if (key.empty()) throw Error(where + ": empty key");
      auto [it, inserted] = f.sections_[section].emplace(key, detail::trim(std::string_view(line).substr(eq + 1)));
      if (!inserted) throw Error(where + ": duplicate key '" + key + "'");
    }
    return f;
  }

  static KeyValueFile load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
  }

  const std::map<std::string, Section>& sections() const { return sections_; }

  const std::string* find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

 private:
  std::map<std::string, Section> sections_;
};

/// Reads typed values out of a KeyValueFile and tracks which keys were used,
/// so that leftovers can be rejected as unknown.
class KeyValueReader {
 public:
  explicit KeyValueReader(const KeyValueFile& file) : file_(file) {}

  const std::string* take(const std::string& section, const std::string& key) {
    const auto* v = file_.find(section, key);
    if (v) used_.insert(section + "." + key);
    return v;
  }

  void read(const std::string& section, const std::string& key, double& out) {
    if (const auto* v = take(section, key)) out = parse_double(*v, section + "." + key);
  }
  void read(const std::string& section, const std::string& key, std::uint64_t& out) {
    if (const auto* v = take(section, key)) out = parse_u64(*v, section + "." + key);
  }
  void read(const std::string& section, const std::string& key, std::string& out) {
    if (const auto* v = take(section, key)) out = *v;
  }

  std::vector<double> read_list(const std::string& section, const std::string& key, std::size_t expected) {
    const auto* v = take(section, key);
    if (!v) return {};
    auto list = parse_double_list(*v, section + "." + key);
    if (list.size() != expected) {
      throw Error(section + "." + key + ": expected " + std::to_string(expected) + " values, got " +
                  std::to_string(list.size()));
    }
    return list;
  }

  /// Throws listing every key that no read() claimed.
  void reject_unknown() const {
    std::string unknown;
    for (const auto& [section, keys] : file_.sections()) {
      for (const auto& [key, value] : keys) {
        const std::string full = section + "." + key;
        if (!used_.contains(full)) unknown += (unknown.empty() ? "" : ", ") + full;
      }
    }
    if (!unknown.empty()) throw Error("unknown config keys: " + unknown);
  }

 private:
  const KeyValueFile& file_;
  std::set<std::string> used_;
};

}  // namespace morkit
