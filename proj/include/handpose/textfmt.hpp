#pragma once

#include <charconv>
#include <string>
#include <system_error>

#include "handpose/error.hpp"

namespace handpose {

// Shortest decimal form that parses back to exactly the same double;
// locale-independent, so emitted files are byte-stable.
inline std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Locale-independent double parse of a whole token.
inline bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  const std::from_chars_result res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

}  // namespace handpose
