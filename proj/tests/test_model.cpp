#include <cmath>

#include "doctest.h"
#include "vortex/model.hpp"

using namespace vortex;

namespace {

GeneralRates neutral(double b, double d, double c) {
  return GeneralRates::uniform({b, d, c, 0.0, 0.0});
}

}  // namespace

TEST_CASE("population states below two individuals are unrepresentable") {
  CHECK_THROWS_AS(PopulationState(1, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(PopulationState(0, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(PopulationState(-1, 2, 1), InvalidArgument);
  const PopulationState s{2, 1, 1};
  CHECK(s.size() == 4);
  CHECK(s.alleles_A() == 5);
  CHECK(s.alleles_a() == 3);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(DemographicParams({0.0, 1.0, 1.0, 0.0, 0.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS(DemographicParams({1.0, 1.0, 0.0, 0.0, 0.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS(DemographicParams({1.0, 0.5, 1.0, -0.7, 0.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS(DemographicParams({1.0, 0.5, 1.0, 0.0, -0.6}).validate(), InvalidArgument);
  CHECK_NOTHROW(DemographicParams({1.0, 0.5, 1.0, -0.2, 0.3}).validate());

  GeneralRates r = neutral(1, 1, 1);
  r.birth[0][1] = 2.0;  // breaks symmetry
  CHECK_THROWS_AS(r.validate(), InvalidArgument);
}

TEST_CASE("birth rates match hand-evaluated values") {
  CHECK(birth_rates({2, 1, 1}, neutral(3, 0, 1)) == std::array<double, 3>{4.0, 7.0, 1.0});
  CHECK(birth_rates({1, 1, 0}, neutral(1, 0, 1)) == std::array<double, 3>{1.0, 1.0, 0.0});
  const auto mono = birth_rates({0, 0, 5}, neutral(2.5, 0, 1));
  CHECK(mono[0] == 0.0);
  CHECK(mono[1] == 0.0);
  CHECK(mono[2] == doctest::Approx(5 * 2.5));
}

TEST_CASE("death rates match hand-evaluated values and vanish at N = 2") {
  CHECK(death_rates({2, 1, 1}, neutral(1, 1, 1)) == std::array<double, 3>{8.0, 4.0, 4.0});
  CHECK(death_rates({3, 0, 0}, neutral(1, 1, 1)) == std::array<double, 3>{9.0, 0.0, 0.0});
  for (const PopulationState s : {PopulationState{2, 0, 0}, PopulationState{1, 1, 0},
                                  PopulationState{0, 2, 0}, PopulationState{1, 0, 1}}) {
    CHECK(death_rates(s, neutral(2, 1, 0.5)) == std::array<double, 3>{0.0, 0.0, 0.0});
  }
}

TEST_CASE("transitions assemble births and deaths with matching total") {
  const TransitionSet ts = transitions({1, 1, 0}, neutral(1, 1, 1));
  CHECK(ts[0].rate == doctest::Approx(1.0));
  CHECK(ts[0].k == 2);
  CHECK(ts[1].rate == doctest::Approx(1.0));
  CHECK(ts[1].m == 2);
  for (int e = 2; e < 6; ++e) CHECK(ts[static_cast<std::size_t>(e)].rate == 0.0);

  // Monomorphic AA: only AA birth and AA death can fire.
  const TransitionSet mono = transitions({2, 0, 0}, neutral(1, 1, 1));
  for (int e = 0; e < 6; ++e) {
    if (e == 0 || e == 3) continue;
    CHECK(mono[static_cast<std::size_t>(e)].rate == 0.0);
  }

  CHECK(total_rate(transitions({0, 0, 3}, neutral(1, 1, 1))) == doctest::Approx(12.0));
}

TEST_CASE("every transition changes one coordinate by one") {
  const GeneralRates r = neutral(2, 0.5, 1);
  for (const PopulationState s : {PopulationState{3, 2, 1}, PopulationState{0, 1, 1},
                                  PopulationState{5, 0, 0}, PopulationState{1, 1, 4}}) {
    for (const Transition& t : transitions(s, r)) {
      const long long dk = std::llabs(t.k - s.k), dm = std::llabs(t.m - s.m),
                      dn = std::llabs(t.n - s.n);
      CHECK(dk + dm + dn == 1);
      if (t.rate > 0.0) CHECK(t.k + t.m + t.n >= 2);
    }
  }
}

TEST_CASE("total birth rate is bounded by max fecundity times N") {
  const GeneralRates r = neutral(1.7, 0.2, 0.9);
  for (long long k = 0; k <= 6; ++k)
    for (long long m = 0; m + k <= 6; ++m)
      for (long long n = std::max<long long>(0, 2 - k - m); n + k + m <= 6; ++n) {
        const PopulationState s{k, m, n};
        const auto b = birth_rates(s, r);
        CHECK(b[0] + b[1] + b[2] <= r.max_birth() * static_cast<double>(s.size()) + 1e-12);
      }
}

TEST_CASE("absorbing sets are closed under transitions") {
  const GeneralRates r = neutral(1, 1, 1);
  for (long long k = 2; k <= 8; ++k) {
    for (const Transition& t : transitions({k, 0, 0}, r)) {
      if (t.rate == 0.0) continue;
      CHECK(classify(t.target()) == Region::GammaA);
    }
  }
  for (long long n = 2; n <= 8; ++n) {
    for (const Transition& t : transitions({0, 0, n}, r)) {
      if (t.rate == 0.0) continue;
      CHECK(classify(t.target()) == Region::Gammaa);
    }
  }
}

TEST_CASE("classification of absorbing and interior states") {
  CHECK(classify({5, 0, 0}) == Region::GammaA);
  CHECK(classify({0, 0, 2}) == Region::Gammaa);
  CHECK(classify({2, 1, 0}) == Region::Interior);
  CHECK(classify({0, 2, 0}) == Region::Interior);
}

TEST_CASE("generator annihilates constants") {
  const GeneralRates r = neutral(2, 1, 0.5);
  const auto constant = [](const PopulationState&) { return 3.25; };
  CHECK(apply_generator(constant, {3, 2, 1}, r) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("neutral allele share is harmonic for the generator") {
  const GeneralRates r = neutral(1.3, 0.4, 0.8);
  const auto p = [](const PopulationState& s) { return neutral_fixation(s); };
  for (long long k = 0; k <= 7; ++k)
    for (long long m = 0; m + k <= 7; ++m)
      for (long long n = std::max<long long>(0, 2 - k - m); n + k + m <= 7; ++n) {
        const PopulationState s{k, m, n};
        const double lp = apply_generator(p, s, r);
        CHECK(std::fabs(lp) <= 1e-12 * (1.0 + total_rate(transitions(s, r))));
      }
}

TEST_CASE("generator drift of the population size at the floor") {
  const GeneralRates r = neutral(1, 1, 1);
  const auto size = [](const PopulationState& s) { return static_cast<double>(s.size()); };
  CHECK(apply_generator(size, {2, 0, 0}, r) == doctest::Approx(2.0));
}

TEST_CASE("neutral fixation formula") {
  CHECK(neutral_fixation({3, 2, 1}) == doctest::Approx(1.0 / 3.0));
  CHECK(neutral_fixation({0, 0, 5}) == 1.0);
  CHECK(neutral_fixation({2, 0, 0}) == 0.0);
}
