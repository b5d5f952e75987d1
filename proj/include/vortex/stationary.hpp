#ifndef VORTEX_STATIONARY_HPP
#define VORTEX_STATIONARY_HPP

#include <iosfwd>
#include <vector>

namespace vortex {

// Stationary law of the monomorphic logistic birth-and-death process on
// N >= 2 (per-capita birth rate b, death rate d + c(N-1), no death at N = 2):
//   l(N) proportional to (1/N) * prod_{j=2}^{N-1} b / (d + jc).
// The support is truncated where the analytic geometric tail bound drops
// below the requested tolerance; tail_mass carries the bound so that
// sum(probs) + tail_mass = 1 exactly.
struct StationaryLaw {
  double b = 0.0, d = 0.0, c = 0.0;
  std::vector<double> probs;  // probs[i] = l(2 + i)
  double tail_mass = 0.0;
  double mean = 0.0;  // E[N] over the truncated support

  int n_min() const { return 2; }
  int n_max() const { return 1 + static_cast<int>(probs.size()); }
  double at(int N) const {
    return (N < 2 || N > n_max()) ? 0.0 : probs[static_cast<std::size_t>(N - 2)];
  }
};

StationaryLaw stationary_law(double b, double d, double c, double tol);

// Single-crossing index of two size laws sharing (b, c) with d_hi > d_lo: the
// unique N0 with l(N, d_hi) >= l(N, d_lo) for N <= N0 and < for N > N0.
// The likelihood ratio q(N) = l(N, d_hi)/l(N, d_lo) decreases strictly in N,
// which is verified on the common support.
int crossing_index(const StationaryLaw& at_d_lo, const StationaryLaw& at_d_hi);

// CSV dump with header N,prob.
void write_stationary_csv(std::ostream& os, const StationaryLaw& law);

}  // namespace vortex

#endif
