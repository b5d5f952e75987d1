#include <cmath>
#include <sstream>

#include "doctest.h"
#include "vortex/stationary.hpp"
#include "vortex/errors.hpp"

using namespace vortex;

TEST_CASE("closed form: unit rates with no natural death give factorial weights") {
  // Weights 1/N! so l(2) = (1/2)/(e-2).
  const StationaryLaw law = stationary_law(1.0, 0.0, 1.0, 1e-12);
  CHECK(std::fabs(law.at(2) - 1.0 / (2.0 * (std::exp(1.0) - 2.0))) <= 1e-12);
  CHECK(law.at(2) == doctest::Approx(0.6961055956).epsilon(1e-9));

  double total = law.tail_mass;
  for (double v : law.probs) total += v;
  CHECK(std::fabs(total - 1.0) <= 1e-14);
  CHECK(law.tail_mass <= 1e-12);
}

TEST_CASE("detailed balance holds across the support") {
  const StationaryLaw law = stationary_law(4.0, 1.0, 0.5, 1e-12);
  const double b = law.b, d = law.d, c = law.c;
  CHECK(2 * b * law.at(2) == doctest::Approx(3 * (d + 2 * c) * law.at(3)).epsilon(1e-13));
  for (int N = 3; N + 1 <= law.n_max(); ++N) {
    const double lhs = b * (N - 1) * law.at(N - 1) + (d + c * N) * (N + 1) * law.at(N + 1);
    const double rhs = N * (b + d + c * (N - 1)) * law.at(N);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("large fecundity: mode near the quasi-equilibrium size, finite mean") {
  const StationaryLaw law = stationary_law(10.0, 0.5, 0.1, 1e-12);
  int mode = 2;
  for (int N = 2; N <= law.n_max(); ++N)
    if (law.at(N) > law.at(mode)) mode = N;
  CHECK(mode > 80);
  CHECK(mode < 110);  // (b - d)/c = 95
  CHECK(law.mean > 80.0);
  CHECK(law.mean < 110.0);
}

TEST_CASE("single crossing of two size laws") {
  const StationaryLaw lo = stationary_law(4.0, 1.0, 1.0, 1e-13);
  const StationaryLaw hi = stationary_law(4.0, 2.0, 1.0, 1e-13);
  const int n0 = crossing_index(lo, hi);
  CHECK(n0 >= 2);
  // Higher death rate piles mass on small sizes first.
  CHECK(hi.at(2) > lo.at(2));
  for (int N = 2; N <= n0; ++N) CHECK(hi.at(N) >= lo.at(N));
  for (int N = n0 + 1; N <= std::min(lo.n_max(), hi.n_max()); ++N) CHECK(hi.at(N) < lo.at(N));

  // The likelihood ratio steps down by (d+cN)/(d'+cN) at every size.
  for (int N = 2; N + 1 <= std::min(lo.n_max(), hi.n_max()); ++N) {
    if (lo.at(N + 1) < 1e-280 || lo.at(N) < 1e-280) break;
    const double q_step = (hi.at(N + 1) / lo.at(N + 1)) / (hi.at(N) / lo.at(N));
    CHECK(q_step == doctest::Approx((lo.d + lo.c * N) / (hi.d + hi.c * N)).epsilon(1e-10));
  }
}

TEST_CASE("crossing rejects equal death rates and mismatched ecologies") {
  const StationaryLaw a = stationary_law(4.0, 1.0, 1.0, 1e-12);
  CHECK_THROWS_AS(crossing_index(a, a), InvalidArgument);
  const StationaryLaw other_c = stationary_law(4.0, 2.0, 0.5, 1e-12);
  CHECK_THROWS_AS(crossing_index(a, other_c), InvalidArgument);
}

TEST_CASE("validation and CSV shape") {
  CHECK_THROWS_AS(stationary_law(0.0, 1.0, 1.0, 1e-10), InvalidArgument);
  CHECK_THROWS_AS(stationary_law(1.0, -0.1, 1.0, 1e-10), InvalidArgument);
  CHECK_THROWS_AS(stationary_law(1.0, 1.0, 1.0, 0.0), InvalidArgument);

  const StationaryLaw law = stationary_law(2.0, 1.0, 0.5, 1e-10);
  std::ostringstream os;
  write_stationary_csv(os, law);
  CHECK(os.str().substr(0, 7) == "N,prob\n");
  CHECK(os.str().find("\n2,") != std::string::npos);
}
