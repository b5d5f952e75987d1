// Acceptance suite runner: executes every verification criterion and prints
// one PASS/FAIL line each. Exit code 0 when all pass, 3 otherwise (the same
// contract as `vortex verify`).

#include <cstring>
#include <iostream>
#include <string>

#include "vortex/verify.hpp"

int main(int argc, char** argv) {
  int only = -1;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::stoi(argv[i + 1]);
  }
  const auto results = vortex::run_acceptance(std::cout, only);
  bool all = true;
  for (const auto& r : results) all = all && r.pass;
  std::cout << (all ? "acceptance: all criteria passed" : "acceptance: FAILURES present")
            << std::endl;
  return all ? 0 : 3;
}
