#ifndef VORTEX_SIMULATE_HPP
#define VORTEX_SIMULATE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "vortex/model.hpp"
#include "vortex/rng.hpp"
#include "vortex/substitution.hpp"

namespace vortex {

// ---------------------------------------------------------------------------
// Exact-event simulation of the 3-type process
// ---------------------------------------------------------------------------

enum class AbsorbedIn { Gammaa, GammaA, Censored };

struct AbsorptionOutcome {
  AbsorbedIn absorbed_in = AbsorbedIn::Censored;
  PopulationState final_state;
  std::uint64_t events = 0;
  double elapsed = 0.0;  // model time
};

struct EventRecord {
  double time;
  EventType event;
  long long k, m, n;  // state after the event
};

// Draws exponential waiting times from the total rate and events by
// cumulative scan in fixed order; stops on Gamma or at the event cap.
// If `log` is non-null every event is appended to it.
AbsorptionOutcome run_to_absorption(const PopulationState& start, const DemographicParams& params,
                                    RngStream& rng, std::uint64_t event_cap = 100'000'000,
                                    std::vector<EventRecord>* log = nullptr);

struct McEstimate {
  double estimate = 0.0;
  double ci_halfwidth_99 = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t absorbed_a = 0;
  std::uint64_t absorbed_A = 0;
  std::uint64_t censored = 0;
};

// Monte Carlo fixation probability; replicate r uses stream_id r, so the
// result is independent of the number of worker threads. Fails if more than
// 0.1% of replicates hit the event cap.
McEstimate mc_fixation(const PopulationState& start, const DemographicParams& params,
                       std::uint64_t reps, std::uint64_t seed, int threads = 1,
                       std::uint64_t event_cap = 100'000'000);

// ---------------------------------------------------------------------------
// Substitution (meltdown) process at the mutational time scale
// ---------------------------------------------------------------------------

// Each fixation of a deleterious mutation raises the intrinsic death rate by
// delta_prime; waiting times between fixations are exponential with the
// substitution rate at the current death rate.
struct MeltdownTrajectory {
  double d0 = 0.0, delta = 0.0, delta_prime = 0.0, mu = 0.0;
  TauMethod method = TauMethod::Linear;
  struct Step {
    int index;            // fixation index j
    double d;             // d0 + j * delta_prime
    double tau;           // substitution rate at this d
    double waiting_time;  // W_j ~ Exp(tau)
  };
  std::vector<Step> steps;
};

// Substitution rates along the meltdown sequence d_j = d0 + j*delta_prime.
std::vector<double> meltdown_rates(double d0, double b, double c, double delta,
                                   double delta_prime, double mu, int n_fixations,
                                   TauMethod method, double tol = 1e-10);

MeltdownTrajectory simulate_meltdown(double d0, double b, double c, double delta,
                                     double delta_prime, double mu, int n_fixations,
                                     std::uint64_t seed, TauMethod method, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Microscopic simulator: explicit individuals, two strand-genomes each,
// per-strand mutations at rate mu/K creating fresh loci (infinite sites)
// ---------------------------------------------------------------------------

struct MicroOptions {
  std::uint64_t event_cap = 100'000'000;
  long long size_cap = 100'000;  // runaway guard; exceeding it censors the run
  bool log_events = false;
  bool stop_at_first_mutation = false;  // for first-mutation-time statistics
};

struct MicroEvent {
  double time;
  char type;  // 'b'irth, 'd'eath, 'm'utation
  long long size;
  std::size_t polymorphic_loci;
};

struct MicroResult {
  double elapsed = 0.0;
  std::uint64_t events = 0;
  bool censored = false;
  std::uint64_t mutations_arisen = 0;
  std::uint64_t mutations_fixed = 0;  // locus present on both strands of everyone
  std::uint64_t mutations_lost = 0;
  double time_monomorphic = 0.0;           // time with all individuals genetically equal
  std::vector<double> size_occupancy;      // time spent at size N (index N)
  std::vector<double> mono_size_occupancy; // same, restricted to monomorphic phases
  std::vector<MicroEvent> events_log;

  // Total-variation distance between the (normalized) monomorphic-phase size
  // occupancy and a reference probability on N >= 2.
  double mono_tv_distance(const std::vector<double>& ref_probs_from_2) const;
};

MicroResult simulate_microscopic(long long initial_size, double b, double d0, double c,
                                 double delta, double delta_prime, double mu, double K,
                                 std::uint64_t seed, double t_end, const MicroOptions& opts = {});

// CSV writers: time,event,k,m,n for the 3-type event log and
// fixation_index,d,waiting_time for meltdown trajectories.
void write_event_log_csv(std::ostream& os, const std::vector<EventRecord>& log);
void write_meltdown_csv(std::ostream& os, const MeltdownTrajectory& t);

}  // namespace vortex

#endif
