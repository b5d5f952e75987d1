#ifndef VORTEX_ERRORS_HPP
#define VORTEX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vortex {

// Precondition / input validation failures. The CLI maps these to exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

// A solver failed to reach its requested accuracy (non-convergence, singular
// pivot, runaway iteration). The CLI maps these to exit code 2.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vortex

#endif
