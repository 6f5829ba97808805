#pragma once

// Small parsing helpers shared by the text formats (CSV, presets, scenario
// and run-config files).

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "rdson/errors.hpp"

namespace rdson::text {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Finite numbers only, unless `allow_inf` (for thresholds spelled "inf").
template <typename T>
bool parse_number(const std::string& s, T& out, bool allow_inf = false) {
  if (s.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    // strtod accepts the exponent forms written by %.12g.
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && !std::isnan(out) && (allow_inf || std::isfinite(out));
  } else {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    auto item =
        trim(std::string_view(s).substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// `key = value` lines; blank lines and `#` comments are skipped.
inline std::vector<KeyValue> parse_key_values(const std::string& content) {
  std::vector<KeyValue> out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= content.size()) {
    const auto nl = content.find('\n', pos);
    const std::string row =
        trim(std::string_view(content).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
    ++line_no;
    pos = nl == std::string::npos ? content.size() + 1 : nl + 1;
    if (row.empty() || row[0] == '#') continue;
    const auto eq = row.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    out.push_back(
        {trim(std::string_view(row).substr(0, eq)), trim(std::string_view(row).substr(eq + 1)), line_no});
  }
  return out;
}

}  // namespace rdson::text
