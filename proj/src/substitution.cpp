#include "vortex/substitution.hpp"

#include <cmath>
#include <ostream>

#include "vortex/csv.hpp"
#include "vortex/dirichlet.hpp"
#include "vortex/errors.hpp"

namespace vortex {

namespace {

// Support the series until the stationary tail (times the trivial bound
// u <= 1 and the factor N) is negligible against the requested tolerance.
StationaryLaw law_for_series(const DemographicParams& p, double tol) {
  return stationary_law(p.b, p.d, p.c, std::min(tol * 1e-2, 1e-12));
}

double series_tail_bound(const StationaryLaw& law) {
  // sum_{N > n_max} N l(N) <= tail_mass * (n_max * r/(1-r) style terms); the
  // auto-selected support already makes tail_mass tiny, so the crude bound
  // tail_mass * 2 * n_max is comfortably below any tolerance in use.
  return law.tail_mass * 2.0 * static_cast<double>(law.n_max());
}

}  // namespace

SubstitutionRate tau_exact(const DemographicParams& params, double mu, double tol) {
  params.validate();
  if (!(mu > 0.0)) throw InvalidArgument("tau_exact: mu must be > 0");
  if (!(tol > 0.0)) throw InvalidArgument("tau_exact: tol must be > 0");

  const StationaryLaw law = law_for_series(params, tol);
  const int n_support = law.n_max();
  const int lattice_n = std::max(n_support + 6, 6);
  if (lattice_n > 450)
    throw NumericalFailure(
        "tau_exact: stationary support needs a lattice of " + std::to_string(lattice_n) +
        " levels (" + std::to_string(TruncatedLattice::level_size(lattice_n)) +
        " states in the top level alone); b/c too large for the exact route, use the "
        "first-order method");

  const FixationTable table = solve_fixation(params, lattice_n);

  double acc = 0.0;
  for (int N = 2; N <= n_support; ++N) {
    acc += static_cast<double>(N) * table.at({N - 1, 1, 0}) * law.at(N);
  }
  const double tau = 2.0 * mu * acc;
  SubstitutionRate out;
  out.tau = tau;
  out.T = 1.0 / tau;
  out.method = TauMethod::Exact;
  out.params = params;
  out.mu = mu;
  out.tol = tol;
  out.tail_bound = 2.0 * mu * series_tail_bound(law);
  return out;
}

SubstitutionRate tau_linear(const DemographicParams& params, double mu,
                            const PerturbationTables& tables, const StationaryLaw& law) {
  params.validate();
  if (!(mu > 0.0)) throw InvalidArgument("tau_linear: mu must be > 0");
  if (tables.n_max < law.n_max())
    throw InvalidArgument("tau_linear: tables do not cover the stationary support");

  double correction = 0.0;
  for (int N = 2; N <= law.n_max(); ++N) {
    const PopulationState entry{N - 1, 1, 0};
    correction += static_cast<double>(N) *
                  (params.delta * v_value(entry, tables) +
                   params.delta_prime * v_prime_value(entry, tables)) *
                  law.at(N);
  }
  const double tau = 2.0 * mu * (0.5 - correction);
  if (!(tau > 0.0))
    throw NumericalFailure("tau_linear: first-order rate not positive; "
                           "perturbations too large for the linearization");
  SubstitutionRate out;
  out.tau = tau;
  out.T = 1.0 / tau;
  out.method = TauMethod::Linear;
  out.params = params;
  out.mu = mu;
  out.tol = tables.achieved_tol;
  out.tail_bound = 2.0 * mu * series_tail_bound(law);
  return out;
}

SubstitutionRate tau_linear(const DemographicParams& params, double mu, double tol) {
  const StationaryLaw law = law_for_series(params, tol);
  RecurrenceOptions opts;
  opts.tol = std::min(tol, 1e-10);
  const PerturbationTables tables = solve_tables(params, std::max(law.n_max(), 4), opts);
  return tau_linear(params, mu, tables, law);
}

double w_value(const PopulationState& s, const DemographicParams& params,
               const PerturbationTables& tables) {
  return params.delta * v_value(s, tables) + params.delta_prime * v_prime_value(s, tables);
}

VortexCurve vortex_curve(const std::vector<double>& d_grid, double b, double c, double delta,
                         double delta_prime, double mu, TauMethod method, double tol) {
  if (d_grid.empty()) throw InvalidArgument("vortex_curve: empty d grid");
  for (std::size_t i = 0; i < d_grid.size(); ++i) {
    if (!(d_grid[i] >= 0.0)) throw InvalidArgument("vortex_curve: d values must be >= 0");
    if (i > 0 && !(d_grid[i] > d_grid[i - 1]))
      throw InvalidArgument("vortex_curve: d grid must be strictly increasing");
  }

  VortexCurve curve;
  curve.b = b;
  curve.c = c;
  curve.delta = delta;
  curve.delta_prime = delta_prime;
  curve.mu = mu;
  curve.method = method;
  curve.rows.reserve(d_grid.size());

  for (double d : d_grid) {
    DemographicParams p{b, d, c, delta, delta_prime};
    const SubstitutionRate r =
        method == TauMethod::Exact ? tau_exact(p, mu, tol) : tau_linear(p, mu, tol);
    curve.rows.push_back({d, r.tau, r.T});
  }

  curve.t_strictly_decreasing = true;
  for (std::size_t i = 1; i < curve.rows.size(); ++i) {
    if (!(curve.rows[i].T < curve.rows[i - 1].T)) {
      curve.t_strictly_decreasing = false;
      break;
    }
  }
  return curve;
}

WMonotonicityReport w_monotonicity_in_d(const PopulationState& s, const DemographicParams& at_d,
                                        const DemographicParams& at_d_hi,
                                        const PerturbationTables& tables_d,
                                        const PerturbationTables& tables_d_hi) {
  if (!(at_d_hi.d > at_d.d))
    throw InvalidArgument("w_monotonicity_in_d: second parameter set must have larger d");
  WMonotonicityReport rep;
  rep.w_at_d = w_value(s, at_d, tables_d);
  rep.w_at_d_hi = w_value(s, at_d_hi, tables_d_hi);
  rep.decreasing = rep.w_at_d_hi <= rep.w_at_d;
  return rep;
}

void write_vortex_csv(std::ostream& os, const VortexCurve& curve) {
  os << "# b=" << csv::num(curve.b) << " c=" << csv::num(curve.c) << " delta="
     << csv::num(curve.delta) << " delta_prime=" << csv::num(curve.delta_prime)
     << " mu=" << csv::num(curve.mu)
     << " method=" << (curve.method == TauMethod::Exact ? "exact" : "linear") << '\n';
  os << "d,tau,T\n";
  for (const auto& row : curve.rows)
    os << csv::num(row.d) << ',' << csv::num(row.tau) << ',' << csv::num(row.T) << '\n';
}

}  // namespace vortex
