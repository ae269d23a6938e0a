#pragma once

#include <charconv>
#include <string>

namespace twinmigrate {

// Shortest decimal text that reads back to the same double.
inline std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace twinmigrate
