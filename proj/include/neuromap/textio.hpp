#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "neuromap/error.hpp"

namespace neuromap::textio {

/// Decimal (never exponent) notation with `sig` significant digits and no
/// trailing zeros. Formatting a parsed result again gives the same text.
inline std::string format_sig(double v, int sig) {
  if (!std::isfinite(v)) fail(ErrorKind::kInvalidArgument, "format_sig: non-finite value");
  if (v == 0.0) return "0";
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*e", sig - 1, v);
  const char* e = std::strchr(buf, 'e');
  const int exponent = std::atoi(e + 1);
  if (exponent >= sig) {
    // Integer part longer than sig digits: rounded mantissa padded with zeros.
    std::string s;
    for (const char* c = buf; c != e; ++c)
      if (*c != '.') s += *c;
    return s + std::string(static_cast<std::size_t>(exponent - (sig - 1)), '0');
  }
  const int decimals = std::max(0, sig - 1 - exponent);
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

inline double parse_double(std::string_view text, const std::string& context) {
  // strtod needs a terminated buffer; fields are short.
  std::string tmp(text);
  if (tmp.empty()) fail(ErrorKind::kParse, context + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || !std::isfinite(v))
    fail(ErrorKind::kParse, context + ": bad number '" + tmp + "'");
  return v;
}

inline unsigned long long parse_u64(std::string_view text, const std::string& context) {
  unsigned long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    fail(ErrorKind::kParse, context + ": bad integer '" + std::string(text) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace neuromap::textio
