#include <cmath>
#include <sstream>

#include "doctest.h"
#include "vortex/substitution.hpp"

using namespace vortex;

TEST_CASE("neutral substitution rate equals the mutation intensity") {
  const DemographicParams p{1.0, 1.0, 1.0, 0.0, 0.0};
  CHECK(std::fabs(tau_exact(p, 0.5).tau - 0.5) <= 1e-9);
  CHECK(std::fabs(tau_exact(p, 1.0).tau - 1.0) <= 1e-9);
  CHECK(std::fabs(tau_linear(p, 0.5).tau - 0.5) <= 1e-12);
  const SubstitutionRate r = tau_exact(p, 0.5);
  CHECK(r.T == doctest::Approx(1.0 / r.tau));
}

TEST_CASE("a deleterious recessive slows substitutions") {
  const DemographicParams neutral{2.0, 1.0, 0.5, 0.0, 0.0};
  const DemographicParams deleterious{2.0, 1.0, 0.5, 0.0, 0.1};
  const double tau0 = tau_exact(neutral, 0.5).tau;
  const double tau1 = tau_exact(deleterious, 0.5).tau;
  CHECK(tau1 < tau0);
  // And more so for a larger homozygote penalty.
  const DemographicParams worse{2.0, 1.0, 0.5, 0.0, 0.2};
  CHECK(tau_exact(worse, 0.5).tau < tau1);
}

TEST_CASE("first-order rate agrees with the exact rate to quadratic order") {
  const double b = 0.3, d = 1.0, c = 1.0, mu = 0.5;
  const auto gap = [&](double delta, double delta_prime) {
    const DemographicParams p{b, d, c, delta, delta_prime};
    return std::fabs(tau_linear(p, mu).tau - tau_exact(p, mu).tau);
  };
  const double g1 = gap(0.04, 0.08);
  const double g2 = gap(0.02, 0.04);
  CHECK(g1 >= 3.0 * g2);  // o(|delta| + |delta'|) remainder
}

TEST_CASE("selective penalty w: trivial zeros and monotone N w at entry states") {
  const DemographicParams p{0.02, 1.0, 1.0, 0.01, 0.02};
  RecurrenceOptions opts;
  opts.allow_fallback = false;
  const PerturbationTables t = solve_tables(p, 20, opts);

  const DemographicParams neutral{0.02, 1.0, 1.0, 0.0, 0.0};
  CHECK(w_value({3, 2, 1}, neutral, t) == 0.0);
  CHECK(w_value({5, 0, 0}, p, t) == doctest::Approx(0.0).epsilon(1e-14));

  // N -> N w((N-1,1,0)) nondecreasing in the small-fecundity regime.
  double prev = 2.0 * w_value({1, 1, 0}, p, t);
  for (int N = 3; N <= 20; ++N) {
    const double cur = N * w_value({N - 1, 1, 0}, p, t);
    CHECK(cur >= prev - 1e-14);
    prev = cur;
  }
}

TEST_CASE("selective penalty at entry states decreases in the death rate") {
  RecurrenceOptions opts;
  opts.allow_fallback = false;
  const DemographicParams lo{0.02, 1.0, 1.0, 0.01, 0.02};
  const DemographicParams hi{0.02, 2.0, 1.0, 0.01, 0.02};
  const PerturbationTables t_lo = solve_tables(lo, 15, opts);
  const PerturbationTables t_hi = solve_tables(hi, 15, opts);
  const WMonotonicityReport rep = w_monotonicity_in_d({9, 1, 0}, lo, hi, t_lo, t_hi);
  CHECK(rep.decreasing);
  CHECK(rep.w_at_d_hi <= rep.w_at_d);
  CHECK_THROWS_AS(w_monotonicity_in_d({9, 1, 0}, hi, lo, t_hi, t_lo), InvalidArgument);
}

TEST_CASE("pivot-shifted rearrangement of the rate difference is exact") {
  // Inserting the crossing-pivot term changes nothing because the law
  // differences sum to zero.
  const double b = 0.5, c = 1.0, d_lo = 1.0, d_hi = 2.0;
  const DemographicParams p_hi{b, d_hi, c, 0.01, 0.02};
  RecurrenceOptions opts;
  opts.allow_fallback = false;
  const StationaryLaw law_lo = stationary_law(b, d_lo, c, 1e-13);
  const StationaryLaw law_hi = stationary_law(b, d_hi, c, 1e-13);
  const int top = std::min(law_lo.n_max(), law_hi.n_max());
  const PerturbationTables t_hi = solve_tables(p_hi, std::max(top, 4), opts);
  const int n0 = crossing_index(law_lo, law_hi);

  double raw = 0.0, shifted = 0.0, scale = 0.0;
  const double pivot = n0 * w_value({n0 - 1, 1, 0}, p_hi, t_hi);
  for (int N = 2; N <= top; ++N) {
    const double dl = law_hi.at(N) - law_lo.at(N);
    const double nw = N * w_value({N - 1, 1, 0}, p_hi, t_hi);
    raw += nw * dl;
    shifted += (nw - pivot) * dl;
    scale += std::fabs(nw * dl);
  }
  CHECK(std::fabs(shifted - raw) <= 1e-10 * (scale + std::fabs(pivot)));
}

TEST_CASE("flat curve in the neutral case, decreasing otherwise") {
  const VortexCurve flat =
      vortex_curve({0.5, 1.0, 1.5, 2.0}, 1.0, 1.0, 0.0, 0.0, 1.0, TauMethod::Exact);
  for (const auto& row : flat.rows) CHECK(std::fabs(row.T - 1.0) <= 1e-6);

  const VortexCurve drop =
      vortex_curve({0.5, 1.0, 1.5, 2.0}, 0.02, 1.0, 0.01, 0.02, 1.0, TauMethod::Linear);
  CHECK(drop.t_strictly_decreasing);
}

TEST_CASE("a larger homozygote penalty lifts the whole curve") {
  const std::vector<double> grid{0.5, 1.0, 1.5};
  const VortexCurve lo =
      vortex_curve(grid, 0.5, 1.0, 0.0, 0.1, 1.0, TauMethod::Exact);
  const VortexCurve hi =
      vortex_curve(grid, 0.5, 1.0, 0.0, 0.2, 1.0, TauMethod::Exact);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(hi.rows[i].T > lo.rows[i].T);
}

TEST_CASE("vortex curve validates its grid") {
  CHECK_THROWS_AS(vortex_curve({}, 1, 1, 0, 0.1, 1, TauMethod::Linear), InvalidArgument);
  CHECK_THROWS_AS(vortex_curve({1.0, 1.0}, 1, 1, 0, 0.1, 1, TauMethod::Linear),
                  InvalidArgument);
  CHECK_THROWS_AS(vortex_curve({-0.5, 1.0}, 1, 1, 0, 0.1, 1, TauMethod::Linear),
                  InvalidArgument);
}

TEST_CASE("vortex CSV carries the flag echo and header") {
  const VortexCurve curve =
      vortex_curve({0.5, 1.0}, 0.02, 1.0, 0.0, 0.02, 1.0, TauMethod::Linear);
  std::ostringstream os;
  write_vortex_csv(os, curve);
  const std::string text = os.str();
  CHECK(text.rfind("# b=0.02 c=1 delta=0 delta_prime=0.02 mu=1 method=linear\n", 0) == 0);
  CHECK(text.find("\nd,tau,T\n") != std::string::npos);
}
