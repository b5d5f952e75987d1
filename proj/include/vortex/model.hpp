#ifndef VORTEX_MODEL_HPP
#define VORTEX_MODEL_HPP

#include <array>
#include <cstdint>
#include <string_view>

#include "vortex/errors.hpp"

namespace vortex {

// Counts of the three diploid genotypes at the focal gene. AA, Aa and aa are
// types 1, 2, 3. States with fewer than two individuals are not representable:
// a population of size one cannot reproduce (self-incompatibility) and is
// treated as extinct, so every solver and simulator works on N >= 2.
struct PopulationState {
  long long k;  // number of AA individuals
  long long m;  // number of Aa individuals
  long long n;  // number of aa individuals

  PopulationState(long long k_, long long m_, long long n_) : k(k_), m(m_), n(n_) {
    if (k < 0 || m < 0 || n < 0) throw InvalidArgument("PopulationState: negative count");
    if (size() < 2) throw InvalidArgument("PopulationState: population size must be >= 2");
  }

  long long size() const { return k + m + n; }
  long long alleles_A() const { return 2 * k + m; }      // Y
  long long alleles_a() const { return m + 2 * n; }      // 2N - Y

  bool operator==(const PopulationState&) const = default;
};

// Demographic parameters of the two-allele study regime: one fecundity b, one
// competition rate c, and genotype-dependent natural death rates
// d, d + delta, d + delta_prime for AA, Aa, aa.
struct DemographicParams {
  double b = 1.0;            // per-capita fecundity (1/time)
  double d = 0.0;            // baseline natural death rate (1/time)
  double c = 1.0;            // pairwise competition rate (1/time)
  double delta = 0.0;        // heterozygote death-rate increment
  double delta_prime = 0.0;  // aa-homozygote death-rate increment

  void validate() const {
    if (!(b > 0.0)) throw InvalidArgument("DemographicParams: b must be > 0");
    if (!(c > 0.0)) throw InvalidArgument("DemographicParams: c must be > 0");
    if (!(d >= 0.0)) throw InvalidArgument("DemographicParams: d must be >= 0");
    if (!(d + delta >= 0.0))
      throw InvalidArgument("DemographicParams: d + delta must be >= 0");
    if (!(d + delta_prime >= 0.0))
      throw InvalidArgument("DemographicParams: d + delta_prime must be >= 0");
  }
};

// Fully general rate tables: symmetric birth rates b_ij for parent genotype
// pairs, strictly positive competition rates c_ij (rate at which one i makes
// one j die), and per-genotype natural death rates d_i.
struct GeneralRates {
  double birth[3][3];  // b_ij, symmetric
  double comp[3][3];   // c_ij, all > 0
  double death[3];     // d_i

  static GeneralRates uniform(const DemographicParams& p) {
    p.validate();
    GeneralRates r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        r.birth[i][j] = p.b;
        r.comp[i][j] = p.c;
      }
    r.death[0] = p.d;
    r.death[1] = p.d + p.delta;
    r.death[2] = p.d + p.delta_prime;
    return r;
  }

  void validate() const {
    for (int i = 0; i < 3; ++i) {
      if (!(death[i] >= 0.0)) throw InvalidArgument("GeneralRates: death rate < 0");
      for (int j = 0; j < 3; ++j) {
        if (!(comp[i][j] > 0.0)) throw InvalidArgument("GeneralRates: competition rate <= 0");
        if (!(birth[i][j] >= 0.0)) throw InvalidArgument("GeneralRates: birth rate < 0");
        if (birth[i][j] != birth[j][i])
          throw InvalidArgument("GeneralRates: birth table must be symmetric");
      }
    }
  }

  double max_birth() const {
    double mx = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) mx = std::max(mx, birth[i][j]);
    return mx;
  }
};

// Event order is fixed; simulators draw events by cumulative scan in this
// order, which makes seeded runs bit-reproducible.
enum class EventType : int {
  BirthAA = 0,
  BirthAa = 1,
  Birthaa = 2,
  DeathAA = 3,
  DeathAa = 4,
  Deathaa = 5,
};

std::string_view event_name(EventType e);

// One of the six possible moves out of a state. Target coordinates are raw
// counts: when the rate is zero the target may fall outside the model domain
// (e.g. a death from N = 2) and must not be dereferenced.
struct Transition {
  EventType event;
  long long k, m, n;
  double rate;

  PopulationState target() const { return {k, m, n}; }
};

using TransitionSet = std::array<Transition, 6>;

// Rates at which one individual of each genotype arises, from random mating of
// a uniform pair with Mendelian segregation. Denominator N - 1 pairs each
// individual with one of the N - 1 others.
std::array<double, 3> birth_rates(const PopulationState& s, const GeneralRates& r);

// Rates at which the population loses one individual of each genotype
// (natural death plus competition exerted by the other N - 1 individuals).
// No death can occur at N = 2, so the population never goes extinct.
std::array<double, 3> death_rates(const PopulationState& s, const GeneralRates& r);

TransitionSet transitions(const PopulationState& s, const GeneralRates& r);

double total_rate(const TransitionSet& ts);

// Generator application: sum of rate * (f(target) - f(state)) over the six
// moves. Zero-rate entries are skipped, so f is only evaluated on reachable
// neighbor states.
template <typename F>
double apply_generator(F&& f, const PopulationState& s, const GeneralRates& r) {
  const TransitionSet ts = transitions(s, r);
  const double fs = f(s);
  double acc = 0.0;
  for (const Transition& t : ts) {
    if (t.rate == 0.0) continue;
    acc += t.rate * (f(t.target()) - fs);
  }
  return acc;
}

// Gamma_A: allele a extinct (only AA left). Gamma_a: allele a fixed (only aa
// left). Both sets are absorbing for the genetic composition.
enum class Region { Interior, GammaA, Gammaa };

Region classify(const PopulationState& s);

// Proportion of allele a. In the neutral case (all rates genotype-blind) it is
// a martingale of the jump chain and equals the fixation probability of a.
double neutral_fixation(const PopulationState& s);

}  // namespace vortex

#endif
