#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace dcoord {

/// Shortest round-trip decimal form of a double ("0.1", "3", "10.5").
/// Used everywhere a float lands in CSV or a file name, so output bytes are
/// reproducible.
inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace dcoord
