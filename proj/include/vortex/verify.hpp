#ifndef VORTEX_VERIFY_HPP
#define VORTEX_VERIFY_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace vortex {

// Built-in verification suite: one entry per acceptance criterion, each with
// its tolerance pinned in code. The CLI `verify` subcommand and the
// acceptance test binary both run this registry.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

// Runs all criteria (or a single one when `only` > 0), printing one
// PASS/FAIL line per criterion to `os` as it goes. Returns the results.
std::vector<CriterionResult> run_acceptance(std::ostream& os, int only = -1);

}  // namespace vortex

#endif
