#ifndef VORTEX_SPARSE_HPP
#define VORTEX_SPARSE_HPP

#include <cstdint>
#include <vector>

namespace vortex {

// Substochastic jump-chain operator P in CSR form, with zero diagonal and the
// strictly-lower / strictly-upper split known per row (every move changes the
// population size by one, and rows are ordered by size, so deaths sit below
// the diagonal and births above). The linear problems solved here are
// fixed-point systems u = P u + g, i.e. (I - P) u = g with I - P a
// nonsingular M-matrix.
struct JumpChainMatrix {
  std::vector<std::size_t> row_begin;   // size rows+1
  std::vector<std::uint32_t> col;       // sorted within each row
  std::vector<double> val;
  std::vector<std::uint32_t> lower_end;  // per row: first index in [row] range with col > row

  std::size_t rows() const { return row_begin.size() - 1; }

  void multiply(const std::vector<double>& x, std::vector<double>& out) const;
};

struct LinearSolveReport {
  int iterations = 0;          // Krylov iterations spent
  int polish_sweeps = 0;       // Gauss-Seidel sweeps after (or instead of) Krylov
  double residual_inf = 0.0;   // final max |g + P u - u|
  bool converged = false;
};

struct LinearSolveOptions {
  double tol = 1e-13;          // target on the fixed-point residual, sup norm
  int max_iterations = 20000;
  int max_polish_sweeps = 60;
};

// Solves u = P u + g. `u` carries the initial guess on entry and the solution
// on exit. BiCGStab preconditioned with one symmetric Gauss-Seidel pass does
// the heavy lifting; plain symmetric sweeps polish the sup-norm residual at
// the end and serve as a fallback if the Krylov iteration stagnates.
LinearSolveReport solve_fixed_point(const JumpChainMatrix& P, const std::vector<double>& g,
                                    std::vector<double>& u, const LinearSolveOptions& opts = {});

}  // namespace vortex

#endif
