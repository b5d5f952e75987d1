#include <cmath>
#include <sstream>

#include "doctest.h"
#include "vortex/simulate.hpp"
#include "vortex/stationary.hpp"

using namespace vortex;

TEST_CASE("an absorbed start needs no events") {
  const DemographicParams p{1.0, 1.0, 1.0, 0.0, 0.0};
  RngStream rng(1, 0);
  const AbsorptionOutcome res = run_to_absorption({0, 0, 4}, p, rng);
  CHECK(res.absorbed_in == AbsorbedIn::Gammaa);
  CHECK(res.events == 0);
  CHECK(res.elapsed == 0.0);
}

TEST_CASE("trajectories move one coordinate at a time and never drop below two") {
  const DemographicParams p{2.0, 1.0, 0.5, 0.02, 0.05};
  RngStream rng(99, 3);
  std::vector<EventRecord> log;
  const AbsorptionOutcome res = run_to_absorption({3, 2, 1}, p, rng, 100'000'000, &log);
  CHECK(res.absorbed_in != AbsorbedIn::Censored);
  long long k = 3, m = 2, n = 1;
  double prev_t = 0.0;
  for (const EventRecord& e : log) {
    const long long dk = std::llabs(e.k - k), dm = std::llabs(e.m - m), dn = std::llabs(e.n - n);
    CHECK(dk + dm + dn == 1);
    CHECK(e.k + e.m + e.n >= 2);
    CHECK(e.time > prev_t);
    prev_t = e.time;
    k = e.k;
    m = e.m;
    n = e.n;
  }
  CHECK(res.final_state == PopulationState{k, m, n});
}

TEST_CASE("identical seed and stream reproduce the event sequence bit for bit") {
  const DemographicParams p{2.0, 1.0, 0.5, 0.0, 0.1};
  std::vector<EventRecord> log1, log2;
  RngStream r1(7, 11), r2(7, 11);
  const AbsorptionOutcome a = run_to_absorption({4, 1, 0}, p, r1, 100'000'000, &log1);
  const AbsorptionOutcome b = run_to_absorption({4, 1, 0}, p, r2, 100'000'000, &log2);
  CHECK(a.events == b.events);
  CHECK(a.elapsed == b.elapsed);
  REQUIRE(log1.size() == log2.size());
  for (std::size_t i = 0; i < log1.size(); ++i) {
    CHECK(log1[i].time == log2[i].time);
    CHECK(log1[i].event == log2[i].event);
  }

  // Distinct streams diverge.
  RngStream r3(7, 12);
  const AbsorptionOutcome c = run_to_absorption({4, 1, 0}, p, r3);
  CHECK((c.events != a.events || c.elapsed != a.elapsed));
}

TEST_CASE("Monte Carlo matches the neutral formula and is thread-invariant") {
  const DemographicParams p{2.0, 1.0, 0.5, 0.0, 0.0};
  const McEstimate one = mc_fixation({3, 2, 1}, p, 30'000, 5ULL, 1);
  CHECK(std::fabs(one.estimate - 1.0 / 3.0) <= one.ci_halfwidth_99);
  const McEstimate two = mc_fixation({3, 2, 1}, p, 30'000, 5ULL, 2);
  CHECK(one.absorbed_a == two.absorbed_a);
  CHECK(one.absorbed_A == two.absorbed_A);
  CHECK(one.censored == two.censored);

  const McEstimate sure = mc_fixation({0, 0, 5}, p, 100, 5ULL);
  CHECK(sure.estimate == 1.0);
  CHECK(sure.ci_halfwidth_99 == 0.0);
}

TEST_CASE("censoring is reported and hard failure triggers above one per mille") {
  const DemographicParams p{2.0, 1.0, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(mc_fixation({3, 2, 1}, p, 1000, 1ULL, 1, /*event_cap=*/3),
                  NumericalFailure);
}

TEST_CASE("first-event frequencies match the transition rates") {
  const DemographicParams p{1.0, 1.0, 1.0, 0.0, 0.0};
  const GeneralRates rates = GeneralRates::uniform(p);
  const PopulationState s{2, 1, 1};
  const TransitionSet ts = transitions(s, rates);
  const double total = total_rate(ts);

  // Forced-return sampling: draw only the first event out of s, repeatedly.
  constexpr int reps = 200'000;
  int counts[6] = {0, 0, 0, 0, 0, 0};
  for (int r = 0; r < reps; ++r) {
    RngStream rng(31415ULL, static_cast<std::uint64_t>(r));
    rng.exponential(total);  // waiting time, discarded
    double w[6];
    for (int e = 0; e < 6; ++e) w[e] = ts[static_cast<std::size_t>(e)].rate;
    ++counts[rng.categorical(w, total)];
  }
  for (int e = 0; e < 6; ++e) {
    const double prob = ts[static_cast<std::size_t>(e)].rate / total;
    const double sigma = std::sqrt(reps * prob * (1 - prob));
    CHECK(std::fabs(counts[e] - reps * prob) <= 3.0 * sigma + 1e-9);
  }
}

TEST_CASE("meltdown trajectories: shape, determinism, increasing rates") {
  const MeltdownTrajectory t =
      simulate_meltdown(0.5, 0.2, 1.0, 0.05, 0.15, 1.0, 5, 17ULL, TauMethod::Linear);
  REQUIRE(t.steps.size() == 5);
  for (int j = 0; j < 5; ++j) {
    CHECK(t.steps[static_cast<std::size_t>(j)].index == j);
    CHECK(t.steps[static_cast<std::size_t>(j)].d ==
          doctest::Approx(0.5 + 0.15 * j));
    CHECK(t.steps[static_cast<std::size_t>(j)].waiting_time > 0.0);
    if (j > 0)
      CHECK(t.steps[static_cast<std::size_t>(j)].tau >
            t.steps[static_cast<std::size_t>(j - 1)].tau);
  }
  const MeltdownTrajectory again =
      simulate_meltdown(0.5, 0.2, 1.0, 0.05, 0.15, 1.0, 5, 17ULL, TauMethod::Linear);
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(t.steps[j].waiting_time == again.steps[j].waiting_time);

  CHECK_THROWS_AS(simulate_meltdown(0.5, 0.2, 1.0, 0.1, 0.1, 1.0, 3, 1ULL, TauMethod::Linear),
                  InvalidArgument);  // overdominance boundary refused
}

TEST_CASE("pooled meltdown waits match their expected means") {
  const std::vector<double> taus =
      meltdown_rates(0.5, 0.2, 1.0, 0.05, 0.15, 1.0, 3, TauMethod::Linear);
  constexpr std::uint64_t reps = 4000;
  std::vector<double> sum(3, 0.0);
  for (std::uint64_t r = 0; r < reps; ++r) {
    RngStream rng(555ULL, r);
    for (std::size_t j = 0; j < 3; ++j) sum[j] += rng.exponential(taus[j]);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    const double mean = sum[j] / reps;
    const double expect = 1.0 / taus[j];
    CHECK(std::fabs(mean - expect) <= 3.0 * expect / std::sqrt(static_cast<double>(reps)));
  }
}

TEST_CASE("microscopic run without mutations stays monomorphic on the logistic law") {
  const MicroResult res =
      simulate_microscopic(3, 2.0, 1.0, 0.5, 0.05, 0.1, 0.0, 10.0, 2024ULL, 30'000.0);
  CHECK(!res.censored);
  CHECK(res.mutations_arisen == 0);
  CHECK(res.time_monomorphic == doctest::Approx(res.elapsed));
  const StationaryLaw law = stationary_law(2.0, 1.0, 0.5, 1e-12);
  CHECK(res.mono_tv_distance(law.probs) < 0.1);
}

TEST_CASE("microscopic mutation bookkeeping is consistent") {
  const MicroResult res =
      simulate_microscopic(4, 2.0, 1.0, 0.5, 0.05, 0.1, 1.0, 5.0, 31ULL, 2'000.0);
  CHECK(res.mutations_arisen > 0);
  CHECK(res.mutations_fixed + res.mutations_lost <= res.mutations_arisen);
  CHECK(res.time_monomorphic <= res.elapsed);

  const MicroResult again =
      simulate_microscopic(4, 2.0, 1.0, 0.5, 0.05, 0.1, 1.0, 5.0, 31ULL, 2'000.0);
  CHECK(res.events == again.events);
  CHECK(res.mutations_arisen == again.mutations_arisen);
}

TEST_CASE("scaled first-mutation time approaches the exponential mixture limit") {
  const double b = 2.0, d0 = 1.0, c = 0.5, mu = 1.0, K = 200.0;
  const StationaryLaw law = stationary_law(b, d0, c, 1e-12);
  const double rate = 2.0 * mu * law.mean;

  MicroOptions opts;
  opts.stop_at_first_mutation = true;
  constexpr int reps = 600;
  std::vector<double> samples;
  samples.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    const MicroResult res = simulate_microscopic(3, b, d0, c, 0.0, 0.0, mu, K,
                                                 90'000ULL + static_cast<std::uint64_t>(r),
                                                 1e18, opts);
    REQUIRE(res.mutations_arisen == 1);
    samples.push_back(res.elapsed / K);
  }
  std::sort(samples.begin(), samples.end());
  double ks = 0.0;
  for (int i = 0; i < reps; ++i) {
    const double F = 1.0 - std::exp(-rate * samples[static_cast<std::size_t>(i)]);
    ks = std::max(ks, std::fabs(F - (i + 1.0) / reps));
    ks = std::max(ks, std::fabs(F - static_cast<double>(i) / reps));
  }
  CHECK(ks < 0.1);  // coarse: finite K plus non-stationary start
}

TEST_CASE("event-log and meltdown CSV formats") {
  const DemographicParams p{2.0, 1.0, 0.5, 0.0, 0.0};
  RngStream rng(4, 0);
  std::vector<EventRecord> log;
  run_to_absorption({2, 1, 0}, p, rng, 100'000'000, &log);
  std::ostringstream os;
  write_event_log_csv(os, log);
  CHECK(os.str().rfind("time,event,k,m,n\n", 0) == 0);

  const MeltdownTrajectory t =
      simulate_meltdown(0.5, 0.2, 1.0, 0.05, 0.15, 1.0, 2, 1ULL, TauMethod::Linear);
  std::ostringstream ms;
  write_meltdown_csv(ms, t);
  CHECK(ms.str().rfind("fixation_index,d,waiting_time\n", 0) == 0);
}
