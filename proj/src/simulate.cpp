#include "vortex/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <thread>

#include "vortex/csv.hpp"
#include "vortex/errors.hpp"

namespace vortex {

AbsorptionOutcome run_to_absorption(const PopulationState& start, const DemographicParams& params,
                                    RngStream& rng, std::uint64_t event_cap,
                                    std::vector<EventRecord>* log) {
  params.validate();
  const GeneralRates rates = GeneralRates::uniform(params);

  PopulationState s = start;
  double t = 0.0;
  std::uint64_t events = 0;
  while (classify(s) == Region::Interior) {
    if (events >= event_cap) return {AbsorbedIn::Censored, s, events, t};
    const TransitionSet ts = transitions(s, rates);
    double w[6];
    for (int e = 0; e < 6; ++e) w[e] = ts[static_cast<std::size_t>(e)].rate;
    const double total = total_rate(ts);
    t += rng.exponential(total);
    const int e = rng.categorical(w, total);
    s = ts[static_cast<std::size_t>(e)].target();
    ++events;
    if (log != nullptr) log->push_back({t, static_cast<EventType>(e), s.k, s.m, s.n});
  }
  return {classify(s) == Region::Gammaa ? AbsorbedIn::Gammaa : AbsorbedIn::GammaA, s, events, t};
}

McEstimate mc_fixation(const PopulationState& start, const DemographicParams& params,
                       std::uint64_t reps, std::uint64_t seed, int threads,
                       std::uint64_t event_cap) {
  params.validate();
  if (reps < 1) throw InvalidArgument("mc_fixation: reps must be >= 1");
  if (threads < 1) threads = 1;

  struct Tally {
    std::uint64_t a = 0, A = 0, censored = 0;
  };
  const auto run_chunk = [&](std::uint64_t lo, std::uint64_t hi, Tally& out) {
    for (std::uint64_t r = lo; r < hi; ++r) {
      RngStream rng(seed, r);
      const AbsorptionOutcome res = run_to_absorption(start, params, rng, event_cap);
      switch (res.absorbed_in) {
        case AbsorbedIn::Gammaa: ++out.a; break;
        case AbsorbedIn::GammaA: ++out.A; break;
        case AbsorbedIn::Censored: ++out.censored; break;
      }
    }
  };

  std::vector<Tally> tallies(static_cast<std::size_t>(threads));
  if (threads == 1) {
    run_chunk(0, reps, tallies[0]);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (reps + static_cast<std::uint64_t>(threads) - 1) /
                                static_cast<std::uint64_t>(threads);
    for (int w = 0; w < threads; ++w) {
      const std::uint64_t lo = chunk * static_cast<std::uint64_t>(w);
      const std::uint64_t hi = std::min(reps, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_chunk, lo, hi, std::ref(tallies[static_cast<std::size_t>(w)]));
    }
    for (auto& th : pool) th.join();
  }

  McEstimate est;
  est.reps = reps;
  for (const Tally& t : tallies) {
    est.absorbed_a += t.a;
    est.absorbed_A += t.A;
    est.censored += t.censored;
  }
  if (est.censored * 1000 > reps)
    throw NumericalFailure("mc_fixation: more than 0.1% of replicates censored at the event cap");
  const double p = static_cast<double>(est.absorbed_a) / static_cast<double>(reps);
  est.estimate = p;
  est.ci_halfwidth_99 = 2.5758293035489 * std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
  return est;
}

std::vector<double> meltdown_rates(double d0, double b, double c, double delta,
                                   double delta_prime, double mu, int n_fixations,
                                   TauMethod method, double tol) {
  if (n_fixations < 1) throw InvalidArgument("meltdown: n_fixations must be >= 1");
  if (!(delta_prime > delta))
    throw InvalidArgument("meltdown: requires delta_prime > delta (no overdominance)");
  std::vector<double> taus;
  taus.reserve(static_cast<std::size_t>(n_fixations));
  for (int j = 0; j < n_fixations; ++j) {
    const DemographicParams p{b, d0 + static_cast<double>(j) * delta_prime, c, delta,
                              delta_prime};
    const SubstitutionRate r =
        method == TauMethod::Exact ? tau_exact(p, mu, tol) : tau_linear(p, mu, tol);
    if (!(r.tau > 0.0)) throw NumericalFailure("meltdown: nonpositive substitution rate");
    taus.push_back(r.tau);
  }
  return taus;
}

MeltdownTrajectory simulate_meltdown(double d0, double b, double c, double delta,
                                     double delta_prime, double mu, int n_fixations,
                                     std::uint64_t seed, TauMethod method, double tol) {
  const std::vector<double> taus =
      meltdown_rates(d0, b, c, delta, delta_prime, mu, n_fixations, method, tol);
  MeltdownTrajectory traj;
  traj.d0 = d0;
  traj.delta = delta;
  traj.delta_prime = delta_prime;
  traj.mu = mu;
  traj.method = method;
  RngStream rng(seed, 0);
  for (int j = 0; j < n_fixations; ++j) {
    const double d = d0 + static_cast<double>(j) * delta_prime;
    traj.steps.push_back({j, d, taus[static_cast<std::size_t>(j)],
                          rng.exponential(taus[static_cast<std::size_t>(j)])});
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Microscopic simulator
// ---------------------------------------------------------------------------

namespace {

using Strand = std::vector<std::uint32_t>;  // sorted locus ids

struct Individual {
  Strand s1, s2;

  // Loci on exactly one strand / on both strands.
  std::pair<std::size_t, std::size_t> load() const {
    std::size_t het = 0, hom = 0;
    std::size_t i = 0, j = 0;
    while (i < s1.size() && j < s2.size()) {
      if (s1[i] == s2[j]) {
        ++hom;
        ++i;
        ++j;
      } else if (s1[i] < s2[j]) {
        ++het;
        ++i;
      } else {
        ++het;
        ++j;
      }
    }
    het += (s1.size() - i) + (s2.size() - j);
    return {het, hom};
  }
};

// Gamete under free recombination: homozygous loci always transmit, loci on a
// single strand transmit with probability 1/2, independently across loci.
Strand make_gamete(const Individual& parent, RngStream& rng) {
  Strand g;
  std::size_t i = 0, j = 0;
  const Strand& a = parent.s1;
  const Strand& b = parent.s2;
  while (i < a.size() || j < b.size()) {
    if (i < a.size() && j < b.size() && a[i] == b[j]) {
      g.push_back(a[i]);
      ++i;
      ++j;
    } else if (j >= b.size() || (i < a.size() && a[i] < b[j])) {
      if (rng.next_u64() & 1ULL) g.push_back(a[i]);
      ++i;
    } else {
      if (rng.next_u64() & 1ULL) g.push_back(b[j]);
      ++j;
    }
  }
  return g;
}

void erase_locus(Strand& s, std::uint32_t locus) {
  const auto it = std::lower_bound(s.begin(), s.end(), locus);
  if (it != s.end() && *it == locus) s.erase(it);
}

}  // namespace

double MicroResult::mono_tv_distance(const std::vector<double>& ref_probs_from_2) const {
  double total = 0.0;
  for (std::size_t N = 2; N < mono_size_occupancy.size(); ++N) total += mono_size_occupancy[N];
  if (total <= 0.0) return 1.0;
  double tv = 0.0;
  const std::size_t top = std::max(mono_size_occupancy.size(), ref_probs_from_2.size() + 2);
  for (std::size_t N = 2; N < top; ++N) {
    const double emp = N < mono_size_occupancy.size() ? mono_size_occupancy[N] / total : 0.0;
    const double ref = (N - 2) < ref_probs_from_2.size() ? ref_probs_from_2[N - 2] : 0.0;
    tv += std::fabs(emp - ref);
  }
  return 0.5 * tv;
}

MicroResult simulate_microscopic(long long initial_size, double b, double d0, double c,
                                 double delta, double delta_prime, double mu, double K,
                                 std::uint64_t seed, double t_end, const MicroOptions& opts) {
  if (initial_size < 2) throw InvalidArgument("micro: initial_size must be >= 2");
  if (!(b > 0.0) || !(c > 0.0) || !(d0 >= 0.0))
    throw InvalidArgument("micro: need b > 0, c > 0, d0 >= 0");
  if (!(K >= 1.0)) throw InvalidArgument("micro: K must be >= 1");
  if (!(mu >= 0.0)) throw InvalidArgument("micro: mu must be >= 0");
  if (!(t_end > 0.0)) throw InvalidArgument("micro: t_end must be > 0");

  std::vector<Individual> pop(static_cast<std::size_t>(initial_size));
  std::map<std::uint32_t, long long> strand_count;  // segregating loci only
  std::uint32_t next_locus = 0;
  double fixed_load = 0.0;  // delta_prime per fixed mutation, shared by everyone

  RngStream rng(seed, 0);
  MicroResult res;
  res.size_occupancy.assign(static_cast<std::size_t>(initial_size) + 8, 0.0);

  const auto natural_death = [&](const Individual& ind) {
    const auto [het, hom] = ind.load();
    return d0 + fixed_load + delta * static_cast<double>(het) +
           delta_prime * static_cast<double>(hom);
  };

  const auto record_occupancy = [&](double dt) {
    const std::size_t N = pop.size();
    if (N >= res.size_occupancy.size()) res.size_occupancy.resize(N + 8, 0.0);
    res.size_occupancy[N] += dt;
    if (strand_count.empty()) {
      if (res.mono_size_occupancy.size() < res.size_occupancy.size())
        res.mono_size_occupancy.resize(res.size_occupancy.size(), 0.0);
      res.mono_size_occupancy[N] += dt;
      res.time_monomorphic += dt;
    }
  };

  const auto adjust_locus = [&](std::uint32_t locus, long long delta_copies) {
    auto it = strand_count.find(locus);
    if (it == strand_count.end()) return;  // already resolved
    it->second += delta_copies;
    if (it->second <= 0) {
      strand_count.erase(it);
      ++res.mutations_lost;
    } else if (it->second == 2 * static_cast<long long>(pop.size())) {
      // Present on both strands of every individual: the mutation is fixed.
      // Fold it into the shared load and drop it from the genomes.
      for (Individual& ind : pop) {
        erase_locus(ind.s1, locus);
        erase_locus(ind.s2, locus);
      }
      strand_count.erase(locus);
      fixed_load += delta_prime;
      ++res.mutations_fixed;
    }
  };

  double t = 0.0;
  while (true) {
    if (res.events >= opts.event_cap ||
        pop.size() > static_cast<std::size_t>(opts.size_cap)) {
      res.censored = true;
      break;
    }
    const double N = static_cast<double>(pop.size());
    const double total_birth = b * N;
    double total_death = 0.0;
    std::vector<double> death_w;
    if (pop.size() >= 3) {
      death_w.resize(pop.size());
      for (std::size_t i = 0; i < pop.size(); ++i) {
        death_w[i] = natural_death(pop[i]) + c * (N - 1.0);
        total_death += death_w[i];
      }
    }
    const double total_mut = (mu / K) * 2.0 * N;
    const double total = total_birth + total_death + total_mut;

    const double dt = rng.exponential(total);
    if (t + dt >= t_end) {
      record_occupancy(t_end - t);
      t = t_end;
      break;
    }
    record_occupancy(dt);
    t += dt;
    ++res.events;

    const double cat[3] = {total_birth, total_death, total_mut};
    const int which = rng.categorical(cat, total);
    if (which == 0) {
      const std::size_t i = static_cast<std::size_t>(rng.uniform_index(pop.size()));
      std::size_t j = static_cast<std::size_t>(rng.uniform_index(pop.size() - 1));
      if (j >= i) ++j;
      Individual child{make_gamete(pop[i], rng), make_gamete(pop[j], rng)};
      std::vector<std::uint32_t> gained;
      gained.reserve(child.s1.size() + child.s2.size());
      gained.insert(gained.end(), child.s1.begin(), child.s1.end());
      gained.insert(gained.end(), child.s2.begin(), child.s2.end());
      pop.push_back(std::move(child));
      for (std::uint32_t locus : gained) adjust_locus(locus, 1);
      if (opts.log_events)
        res.events_log.push_back({t, 'b', static_cast<long long>(pop.size()),
                                  strand_count.size()});
    } else if (which == 1) {
      const std::size_t victim =
          static_cast<std::size_t>(rng.categorical(death_w, total_death));
      Individual dead = std::move(pop[victim]);
      if (victim + 1 != pop.size()) pop[victim] = std::move(pop.back());
      pop.pop_back();
      for (std::uint32_t locus : dead.s1) adjust_locus(locus, -1);
      for (std::uint32_t locus : dead.s2) adjust_locus(locus, -1);
      if (opts.log_events)
        res.events_log.push_back({t, 'd', static_cast<long long>(pop.size()),
                                  strand_count.size()});
    } else {
      const std::size_t i = static_cast<std::size_t>(rng.uniform_index(pop.size()));
      const std::uint32_t locus = next_locus++;
      Strand& s = (rng.next_u64() & 1ULL) ? pop[i].s1 : pop[i].s2;
      s.push_back(locus);  // fresh ids increase, so the strand stays sorted
      strand_count[locus] = 1;
      ++res.mutations_arisen;
      if (opts.log_events)
        res.events_log.push_back({t, 'm', static_cast<long long>(pop.size()),
                                  strand_count.size()});
      if (opts.stop_at_first_mutation) break;
    }
  }
  res.elapsed = t;
  return res;
}

void write_event_log_csv(std::ostream& os, const std::vector<EventRecord>& log) {
  os << "time,event,k,m,n\n";
  for (const EventRecord& e : log) {
    os << csv::num(e.time) << ',' << event_name(e.event) << ',' << e.k << ',' << e.m << ','
       << e.n << '\n';
  }
}

void write_meltdown_csv(std::ostream& os, const MeltdownTrajectory& t) {
  os << "fixation_index,d,waiting_time\n";
  for (const auto& step : t.steps)
    os << step.index << ',' << csv::num(step.d) << ',' << csv::num(step.waiting_time) << '\n';
}

}  // namespace vortex
