#ifndef VORTEX_CSV_HPP
#define VORTEX_CSV_HPP

#include <cstdio>
#include <string>

namespace vortex::csv {

// Deterministic numeric formatting for CSV output: fixed precision,
// locale-independent, so repeated runs emit byte-identical files.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace vortex::csv

#endif
