#ifndef VORTEX_SUBSTITUTION_HPP
#define VORTEX_SUBSTITUTION_HPP

#include <iosfwd>
#include <vector>

#include "vortex/model.hpp"
#include "vortex/recurrence.hpp"
#include "vortex/stationary.hpp"

namespace vortex {

// Jump rate of the limiting substitution process under rare mutations: a
// mutation enters a resident population of stationary size N as a single
// heterozygote, i.e. from state (N-1, 1, 0), and fixes with probability
// u((N-1,1,0)). Averaging over the size law and the per-strand mutation
// intensity mu gives
//   tau = 2 mu * sum_{N>=2} N u((N-1,1,0)) l(N),
// with the mutation kernel fixed to a single focal substitution target.
// T = 1/tau is the mean time between fixations.
enum class TauMethod { Exact, Linear };

struct SubstitutionRate {
  double tau = 0.0;
  double T = 0.0;
  TauMethod method = TauMethod::Exact;
  DemographicParams params;
  double mu = 0.0;
  double tol = 0.0;
  double tail_bound = 0.0;  // bound on the truncated part of the series
};

// Exact route: u from the Dirichlet solver on a lattice sized to the
// stationary support.
SubstitutionRate tau_exact(const DemographicParams& params, double mu, double tol = 1e-10);

// First-order route: tau = 2 mu (1/2 - sum N [delta v + delta' v'](N-1,1,0) l(N)).
SubstitutionRate tau_linear(const DemographicParams& params, double mu,
                            const PerturbationTables& tables, const StationaryLaw& law);

// Convenience overload that builds tables and law itself.
SubstitutionRate tau_linear(const DemographicParams& params, double mu, double tol = 1e-10);

// Combined first-order selective penalty w = delta v + delta' v'.
double w_value(const PopulationState& s, const DemographicParams& params,
               const PerturbationTables& tables);

// One row per intrinsic death rate d; T strictly decreasing along an
// increasing d grid is the extinction-vortex signature.
struct VortexCurve {
  double b = 0.0, c = 0.0, delta = 0.0, delta_prime = 0.0, mu = 0.0;
  TauMethod method = TauMethod::Exact;
  struct Row {
    double d, tau, T;
  };
  std::vector<Row> rows;
  bool t_strictly_decreasing = false;
};

VortexCurve vortex_curve(const std::vector<double>& d_grid, double b, double c, double delta,
                         double delta_prime, double mu, TauMethod method, double tol = 1e-10);

// Numerical check that the selective penalty at mutant-entry states decreases
// when the intrinsic death rate rises (the mechanism behind the vortex).
struct WMonotonicityReport {
  double w_at_d = 0.0;
  double w_at_d_hi = 0.0;
  bool decreasing = false;
};

WMonotonicityReport w_monotonicity_in_d(const PopulationState& s, const DemographicParams& at_d,
                                        const DemographicParams& at_d_hi,
                                        const PerturbationTables& tables_d,
                                        const PerturbationTables& tables_d_hi);

// CSV with a flag-echo comment line, then header d,tau,T.
void write_vortex_csv(std::ostream& os, const VortexCurve& curve);

}  // namespace vortex

#endif
