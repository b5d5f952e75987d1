#ifndef VORTEX_DIRICHLET_HPP
#define VORTEX_DIRICHLET_HPP

#include <iosfwd>
#include <vector>

#include "vortex/lattice.hpp"
#include "vortex/model.hpp"
#include "vortex/sparse.hpp"

namespace vortex {

struct DirichletOptions {
  double tol = 1e-13;      // sup-norm residual target for the jump-chain balance
  int max_iterations = 20000;
  bool refine = false;     // re-solve at 2*n_max to measure the truncation error
};

// Fixation probability of allele a on the truncated lattice: u solves the
// jump-chain balance u(s) = sum pi(s -> s') u(s') on interior states, with
// u = 1 on Gamma_a and u = 0 on Gamma_A. At N = n_max births are suppressed
// and the jump chain renormalized (reflecting upper wall).
struct FixationTable {
  TruncatedLattice lattice;
  DemographicParams params;
  std::vector<double> u;                   // one value per lattice state
  double residual_inf = 0.0;               // achieved balance residual
  double truncation_error_estimate = 0.0;  // doubling estimate or tail bound

  double at(const PopulationState& s) const { return u[lattice.index(s)]; }
};

FixationTable solve_fixation(const DemographicParams& params, int n_max,
                             const DirichletOptions& opts = {});

// Expected number of jump-chain steps to reach Gamma: t = 1 + sum pi t' on
// interior states, t = 0 on Gamma, same wall rule as solve_fixation.
struct HittingTimeTable {
  TruncatedLattice lattice;
  DemographicParams params;
  std::vector<double> t;
  double residual_inf = 0.0;

  double at(const PopulationState& s) const { return t[lattice.index(s)]; }
};

HittingTimeTable solve_mean_steps(const DemographicParams& params, int n_max,
                                  const DirichletOptions& opts = {});

// Central finite differences of the fixation probability in the two death-rate
// increments, taken at the neutral point (delta = delta_prime = 0) of the
// given (b, d, c). Sign convention: v and v_prime are the NEGATIVES of the
// partial derivatives, matching the first-order expansion
// u = p - delta*v - delta_prime*v_prime. This is the ground-truth oracle for
// the recurrence machinery.
struct FdGradientTable {
  TruncatedLattice lattice;
  double h;
  std::vector<double> v;        // -(u(+h,0) - u(-h,0)) / (2h)
  std::vector<double> v_prime;  // -(u(0,+h) - u(0,-h)) / (2h)

  double v_at(const PopulationState& s) const { return v[lattice.index(s)]; }
  double v_prime_at(const PopulationState& s) const { return v_prime[lattice.index(s)]; }
};

FdGradientTable fd_gradient_table(const DemographicParams& params, double h, int n_max,
                                  const DirichletOptions& opts = {});

struct FdGradient {
  double v = 0.0;
  double v_prime = 0.0;
};

// Per-state convenience wrapper; h <= 0 selects the default 1e-3 * max(1, d).
FdGradient fd_gradient(const DemographicParams& params, const PopulationState& s, double h,
                       int n_max, const DirichletOptions& opts = {});

// CSV dump with header k,m,n,u, one row per state in lattice order.
void write_fixation_csv(std::ostream& os, const FixationTable& table);

}  // namespace vortex

#endif
