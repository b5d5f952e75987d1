#include "vortex/verify.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "vortex/dirichlet.hpp"
#include "vortex/recurrence.hpp"
#include "vortex/simulate.hpp"
#include "vortex/stationary.hpp"
#include "vortex/substitution.hpp"

namespace vortex {

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
  void note(const std::string& what) {
    if (detail.tellp() > 0) detail << "; ";
    detail << what;
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// --- 1. Neutral exactness -------------------------------------------------

Check criterion_neutral_exactness() {
  Check c;
  const DemographicParams sets[3] = {
      {2.0, 1.0, 0.5, 0.0, 0.0}, {1.0, 1.0, 1.0, 0.0, 0.0}, {3.0, 0.5, 1.0, 0.0, 0.0}};
  double worst = 0.0;
  for (const auto& p : sets) {
    const FixationTable table = solve_fixation(p, 60);
    table.lattice.for_each([&](std::size_t idx, const PopulationState& s) {
      if (s.size() <= 30)
        worst = std::max(worst, std::fabs(table.u[idx] - neutral_fixation(s)));
    });
  }
  c.require(worst <= 1e-8, "max |u - p| = " + fmt(worst) + " > 1e-8");
  c.note("max |u - p| = " + fmt(worst) + " over 3 parameter sets, N <= 30");
  return c;
}

// --- 2. Monte Carlo vs formula ---------------------------------------------

Check criterion_mc_neutral() {
  Check c;
  const DemographicParams p{2.0, 1.0, 0.5, 0.0, 0.0};
  const McEstimate est = mc_fixation({3, 2, 1}, p, 100'000, 20260808ULL, 2);
  const double err = std::fabs(est.estimate - 1.0 / 3.0);
  c.require(err <= est.ci_halfwidth_99,
            "99% CI misses 1/3: estimate " + fmt(est.estimate) + " +/- " +
                fmt(est.ci_halfwidth_99));
  c.note("estimate " + fmt(est.estimate) + " +/- " + fmt(est.ci_halfwidth_99) + " vs 1/3");
  return c;
}

// --- 3. Oracle equivalence of the recurrence machinery ----------------------

Check criterion_oracle_equivalence() {
  Check c;
  const DemographicParams p{0.02, 1.0, 1.0, 0.0, 0.0};
  RecurrenceOptions opts;
  opts.allow_fallback = false;
  const PerturbationTables tables = solve_tables(p, 40, opts);
  const FdGradientTable fd = fd_gradient_table(p, 1e-3, 120);

  double worst_ratio = 0.0;
  TruncatedLattice probe(15);
  probe.for_each([&](std::size_t, const PopulationState& s) {
    if (classify(s) != Region::Interior) return;
    const double v_rec = v_value(s, tables);
    const double vp_rec = v_prime_value(s, tables);
    const double v_fd = fd.v_at(s);
    const double vp_fd = fd.v_prime_at(s);
    const double tol_v = std::max(1e-4, 0.01 * std::fabs(v_fd));
    const double tol_vp = std::max(1e-4, 0.01 * std::fabs(vp_fd));
    worst_ratio = std::max(worst_ratio, std::fabs(v_rec - v_fd) / tol_v);
    worst_ratio = std::max(worst_ratio, std::fabs(vp_rec - vp_fd) / tol_vp);
  });
  c.require(worst_ratio <= 1.0,
            "v/v' vs finite differences: worst error at " + fmt(worst_ratio) +
                "x the allowed max(1e-4, 1%)");
  c.note("worst error = " + fmt(worst_ratio) + "x tolerance, all interior states N <= 15");
  return c;
}

// --- 4. Recurrence residuals and bottom identities ---------------------------

Check criterion_residuals() {
  Check c;
  const DemographicParams p{0.02, 1.0, 1.0, 0.0, 0.0};
  RecurrenceOptions opts;
  opts.allow_fallback = false;
  const PerturbationTables t = solve_tables(p, 60, opts);
  c.require(t.method == TableMethod::Recurrence, "solver fell back unexpectedly");
  c.require(t.diagnostics.max_residual_first <= 1e-10,
            "first-layer residual " + fmt(t.diagnostics.max_residual_first));
  c.require(t.diagnostics.max_residual_second <= 1e-10,
            "primed-layer residual " + fmt(t.diagnostics.max_residual_second));
  const double s2_gap = std::fabs(t.s2 - ((4.0 / 3.0) * t.x_at(3) + 2.0 * t.y_at(3)));
  c.require(s2_gap <= 1e-10, "s2 identity gap " + fmt(s2_gap));
  c.require(t.diagnostics.h3_split_diff <= 1e-10,
            "h3 split dependence " + fmt(t.diagnostics.h3_split_diff));
  c.require(t.diagnostics.vprime_n2_split_diff <= 1e-10,
            "v' split dependence at N=2 " + fmt(t.diagnostics.vprime_n2_split_diff));
  c.note("residuals " + fmt(t.diagnostics.max_residual_first) + " / " +
         fmt(t.diagnostics.max_residual_second) + ", h3 split " +
         fmt(t.diagnostics.h3_split_diff));
  return c;
}

// --- 5. Solver diagnostics in the small-fecundity regime --------------------

Check criterion_diagnostics() {
  Check c;
  const DemographicParams p{0.02, 1.0, 1.0, 0.0, 0.0};
  RecurrenceOptions opts;
  opts.allow_fallback = false;
  const PerturbationTables t = solve_tables(p, 120, opts);

  double max_g = 0.0, max_k = 0.0;
  for (const auto& row : t.diagnostics.rows) {
    if (row.N < 4) continue;  // the N = 3 pivot is O(c) by construction
    max_g = std::max(max_g, row.norm_G);
    max_k = std::max(max_k, row.norm_K);
  }
  c.require(max_g <= 9.0, "||G_N|| up to " + fmt(max_g) + " > 9");
  c.require(max_k < p.c / 2.0, "||K_N|| up to " + fmt(max_k) + " >= c/2");

  // Least squares fit y_N ~ C1/N + C2/N^2 on the upper half of the range.
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (int N = 60; N <= 120; ++N) {
    const double u = 1.0 / N, w = u * u;
    a11 += u * u;
    a12 += u * w;
    a22 += w * w;
    b1 += u * t.y_at(N);
    b2 += w * t.y_at(N);
  }
  const double det = a11 * a22 - a12 * a12;
  const double c1 = (b1 * a22 - b2 * a12) / det;
  const double c2 = (a11 * b2 - a12 * b1) / det;
  double worst_fit = 0.0;
  for (int N = 60; N <= 120; ++N) {
    const double fitted = c1 / N + c2 / (static_cast<double>(N) * N);
    worst_fit = std::max(worst_fit, std::fabs(fitted - t.y_at(N)) / std::fabs(t.y_at(N)));
  }
  c.require(worst_fit <= 0.01, "y_N ~ C1/N + C2/N^2 fit residual " + fmt(worst_fit));
  c.note("||G|| <= " + fmt(max_g) + ", ||K|| <= " + fmt(max_k) + ", y-fit residual " +
         fmt(worst_fit));
  return c;
}

// --- 6. Stationary law -------------------------------------------------------

Check criterion_stationary() {
  Check c;
  const StationaryLaw law = stationary_law(1.0, 0.0, 1.0, 1e-12);
  const double l2_exact = 1.0 / (2.0 * (std::exp(1.0) - 2.0));
  c.require(std::fabs(law.at(2) - l2_exact) <= 1e-10,
            "l(2) = " + fmt(law.at(2)) + " vs closed form " + fmt(l2_exact));

  double norm = law.tail_mass;
  for (double v : law.probs) norm += v;
  c.require(std::fabs(norm - 1.0) <= 1e-14, "sum probs + tail = " + fmt(norm));

  double worst = 0.0;
  const double b = law.b, d = law.d, cc = law.c;
  for (int N = 3; N + 1 <= law.n_max(); ++N) {
    const double lhs = b * (N - 1) * law.at(N - 1) + (d + cc * N) * (N + 1) * law.at(N + 1);
    const double rhs = N * (b + d + cc * (N - 1)) * law.at(N);
    if (rhs > 0) worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
  }
  const double boundary =
      std::fabs(2 * b * law.at(2) - 3 * (d + 2 * cc) * law.at(3)) / (2 * b * law.at(2));
  worst = std::max(worst, boundary);
  c.require(worst <= 1e-12, "balance residual " + fmt(worst));
  c.note("l(2) err " + fmt(std::fabs(law.at(2) - l2_exact)) + ", balance residual " + fmt(worst));
  return c;
}

// --- 7. Single crossing of size laws ----------------------------------------

Check criterion_single_crossing() {
  Check c;
  const StationaryLaw lo = stationary_law(4.0, 1.0, 1.0, 1e-13);
  const StationaryLaw hi = stationary_law(4.0, 2.0, 1.0, 1e-13);
  try {
    const int n0 = crossing_index(lo, hi);  // verifies q decreasing + one sign change
    c.require(n0 >= 2, "crossing index " + std::to_string(n0));
    c.note("crossing at N0 = " + std::to_string(n0));
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  return c;
}

// --- 8. Neutral substitution rate -------------------------------------------

Check criterion_neutral_tau() {
  Check c;
  const DemographicParams p{1.0, 1.0, 1.0, 0.0, 0.0};
  for (double mu : {0.5, 1.0}) {
    const double te = tau_exact(p, mu).tau;
    const double tl = tau_linear(p, mu).tau;
    c.require(std::fabs(te - mu) <= 1e-8,
              "tau_exact(mu=" + fmt(mu) + ") = " + fmt(te));
    c.require(std::fabs(tl - mu) <= 1e-8,
              "tau_linear(mu=" + fmt(mu) + ") = " + fmt(tl));
  }
  c.note("tau = mu to 1e-8 for mu in {1/2, 1}");
  return c;
}

// --- 9. Mean fixation time decreasing in d -----------------------------------

Check criterion_vortex_monotonic() {
  Check c;
  const std::vector<double> small_grid{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  const VortexCurve exact_small =
      vortex_curve(small_grid, 0.02, 1.0, 0.01, 0.02, 1.0, TauMethod::Exact);
  c.require(exact_small.t_strictly_decreasing, "desk-scale exact curve not decreasing");
  const VortexCurve linear_small =
      vortex_curve(small_grid, 0.02, 1.0, 0.01, 0.02, 1.0, TauMethod::Linear);
  c.require(linear_small.t_strictly_decreasing, "desk-scale linear curve not decreasing");

  std::vector<double> fig_grid;
  for (double d = 0.5; d <= 3.0 + 1e-9; d += 0.25) fig_grid.push_back(d);
  const VortexCurve fig =
      vortex_curve(fig_grid, 10.0, 0.1, 0.0, 0.1, 1.0, TauMethod::Exact, 1e-8);
  c.require(fig.t_strictly_decreasing, "large-fecundity exact curve not decreasing");
  c.note("T decreasing on both grids; large-fecundity T spans " +
         fmt(fig.rows.front().T) + " .. " + fmt(fig.rows.back().T));
  return c;
}

// --- 10. First-order remainder is superlinear --------------------------------

Check criterion_first_order_remainder() {
  Check c;
  const PopulationState probes[10] = {{2, 1, 0}, {1, 1, 1}, {4, 1, 0}, {3, 2, 1}, {1, 2, 3},
                                      {5, 1, 2}, {1, 2, 5}, {6, 2, 1}, {2, 3, 4}, {8, 1, 0}};
  const double base_b = 1.0, base_d = 1.0, base_c = 1.0;
  RecurrenceOptions ropts;
  ropts.allow_fallback = false;

  const auto gaps_at = [&](double delta, double delta_prime) {
    const DemographicParams p{base_b, base_d, base_c, delta, delta_prime};
    const FixationTable exact = solve_fixation(p, 60);
    const PerturbationTables tables = solve_tables(p, 30, ropts);
    std::vector<double> gap;
    for (const auto& s : probes)
      gap.push_back(std::fabs(fixation_first_order(s, p, tables).raw - exact.at(s)));
    return gap;
  };

  const std::vector<double> g1 = gaps_at(0.02, 0.04);
  const std::vector<double> g2 = gaps_at(0.01, 0.02);
  double worst = 1e9;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    if (g2[i] < 1e-13) continue;  // remainder below solver noise
    worst = std::min(worst, g1[i] / g2[i]);
  }
  c.require(worst >= 3.0, "halving (delta, delta') shrank the gap only " + fmt(worst) + "x");
  c.note("min shrink factor " + fmt(worst) + "x across 10 probe states");
  return c;
}

// --- 11. Simulated meltdown accelerates --------------------------------------

Check criterion_meltdown_sim() {
  Check c;
  const double d0 = 0.5, b = 0.2, cc = 1.0, delta = 0.05, delta_prime = 0.15, mu = 1.0;
  const int n_fix = 5;
  const std::vector<double> taus =
      meltdown_rates(d0, b, cc, delta, delta_prime, mu, n_fix, TauMethod::Exact);
  for (int j = 0; j + 1 < n_fix; ++j)
    c.require(taus[static_cast<std::size_t>(j)] < taus[static_cast<std::size_t>(j + 1)],
              "computed rates not increasing at step " + std::to_string(j));

  // Pool enough seeds that the smallest relative gap between consecutive mean
  // waits sits 6 sigma above the comparison noise.
  double min_gap = 1.0;
  for (int j = 0; j + 1 < n_fix; ++j) {
    const double t0 = 1.0 / taus[static_cast<std::size_t>(j)];
    const double t1 = 1.0 / taus[static_cast<std::size_t>(j + 1)];
    min_gap = std::min(min_gap, (t0 - t1) / t0);
  }
  std::uint64_t reps = 1000;
  if (min_gap > 0.0)
    reps = std::max<std::uint64_t>(
        1000, static_cast<std::uint64_t>(72.0 / (min_gap * min_gap)) + 1);
  reps = std::min<std::uint64_t>(reps, 20'000'000);

  std::vector<double> sum(static_cast<std::size_t>(n_fix), 0.0);
  for (std::uint64_t r = 0; r < reps; ++r) {
    RngStream rng(977001ULL, r);
    for (int j = 0; j < n_fix; ++j)
      sum[static_cast<std::size_t>(j)] += rng.exponential(taus[static_cast<std::size_t>(j)]);
  }
  bool decreasing = true;
  for (int j = 0; j < n_fix; ++j) {
    const double mean = sum[static_cast<std::size_t>(j)] / static_cast<double>(reps);
    const double expect = 1.0 / taus[static_cast<std::size_t>(j)];
    const double se = expect / std::sqrt(static_cast<double>(reps));
    c.require(std::fabs(mean - expect) <= 3.0 * se,
              "mean wait " + std::to_string(j) + " off by " +
                  fmt(std::fabs(mean - expect) / se) + " SE");
    if (j > 0 && !(sum[static_cast<std::size_t>(j)] < sum[static_cast<std::size_t>(j - 1)]))
      decreasing = false;
  }
  c.require(decreasing, "pooled mean waits not strictly decreasing");
  c.note("pooled over " + std::to_string(reps) + " seeds; min relative gap " + fmt(min_gap));
  return c;
}

// --- 12. Seeded determinism ---------------------------------------------------

Check criterion_determinism() {
  Check c;
  const DemographicParams p{2.0, 1.0, 0.5, 0.0, 0.0};
  const McEstimate one = mc_fixation({3, 2, 1}, p, 20'000, 7ULL, 1);
  const McEstimate two = mc_fixation({3, 2, 1}, p, 20'000, 7ULL, 2);
  c.require(one.absorbed_a == two.absorbed_a && one.absorbed_A == two.absorbed_A,
            "Monte Carlo tallies depend on worker count");

  const auto meltdown_csv = [] {
    const MeltdownTrajectory t =
        simulate_meltdown(0.5, 0.2, 1.0, 0.05, 0.15, 1.0, 5, 11ULL, TauMethod::Linear);
    std::ostringstream os;
    write_meltdown_csv(os, t);
    return os.str();
  };
  c.require(meltdown_csv() == meltdown_csv(), "meltdown CSV not byte-stable");

  const auto vortex_csv = [] {
    const VortexCurve curve =
        vortex_curve({0.5, 1.0, 1.5}, 0.02, 1.0, 0.01, 0.02, 1.0, TauMethod::Linear);
    std::ostringstream os;
    write_vortex_csv(os, curve);
    return os.str();
  };
  c.require(vortex_csv() == vortex_csv(), "vortex CSV not byte-stable");

  RngStream r1(3ULL, 5ULL), r2(3ULL, 5ULL);
  AbsorptionOutcome a1 = run_to_absorption({3, 2, 1}, p, r1);
  AbsorptionOutcome a2 = run_to_absorption({3, 2, 1}, p, r2);
  c.require(a1.events == a2.events && a1.elapsed == a2.elapsed &&
                a1.final_state == a2.final_state,
            "seeded trajectory not reproducible");
  c.note("tallies, CSVs and trajectories identical across repeats and worker counts");
  return c;
}

// --- 13. Microscopic smoke test ----------------------------------------------

Check criterion_micro() {
  Check c;
  const MicroResult res =
      simulate_microscopic(3, 2.0, 1.0, 0.5, 0.05, 0.1, 0.0, 10.0, 99ULL, 200'000.0);
  c.require(!res.censored, "run censored");
  c.require(res.mutations_arisen == 0, "mutations arose at mu = 0");
  c.require(std::fabs(res.time_monomorphic - res.elapsed) < 1e-9,
            "population left the monomorphic phase at mu = 0");
  const StationaryLaw law = stationary_law(2.0, 1.0, 0.5, 1e-12);
  const double tv = res.mono_tv_distance(law.probs);
  c.require(tv < 0.05, "size-law TV distance " + fmt(tv));
  c.note("TV distance to the stationary size law = " + fmt(tv));
  return c;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream& os, int only) {
  struct Entry {
    int id;
    const char* name;
    std::function<Check()> run;
  };
  const Entry entries[] = {
      {1, "neutral exactness of the fixation solver", criterion_neutral_exactness},
      {2, "Monte Carlo fixation matches the neutral formula", criterion_mc_neutral},
      {3, "recurrence tables match the finite-difference oracle", criterion_oracle_equivalence},
      {4, "recurrence residuals and bottom identities", criterion_residuals},
      {5, "solver diagnostics in the small-fecundity regime", criterion_diagnostics},
      {6, "stationary size law: closed form and balance", criterion_stationary},
      {7, "size laws at two death rates cross exactly once", criterion_single_crossing},
      {8, "neutral substitution rate equals mu", criterion_neutral_tau},
      {9, "mean fixation time decreases in d (both regimes)", criterion_vortex_monotonic},
      {10, "first-order remainder shrinks superlinearly", criterion_first_order_remainder},
      {11, "simulated meltdown waits accelerate as predicted", criterion_meltdown_sim},
      {12, "seeded runs are deterministic", criterion_determinism},
      {13, "microscopic simulator: monomorphic phase smoke test", criterion_micro},
  };

  std::vector<CriterionResult> out;
  for (const Entry& e : entries) {
    if (only > 0 && e.id != only) continue;
    CriterionResult res;
    res.id = e.id;
    res.name = e.name;
    try {
      Check c = e.run();
      res.pass = c.pass;
      res.detail = c.detail.str();
    } catch (const std::exception& ex) {
      res.pass = false;
      res.detail = std::string("exception: ") + ex.what();
    }
    os << (res.pass ? "PASS" : "FAIL") << "  [" << res.id << "] " << res.name;
    if (!res.detail.empty()) os << "  (" << res.detail << ")";
    os << std::endl;
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace vortex
