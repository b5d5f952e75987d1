#include "vortex/stationary.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "vortex/csv.hpp"
#include "vortex/errors.hpp"

namespace vortex {

StationaryLaw stationary_law(double b, double d, double c, double tol) {
  if (!(b > 0.0) || !(c > 0.0) || !(d >= 0.0))
    throw InvalidArgument("stationary_law: need b > 0, c > 0, d >= 0");
  if (!(tol > 0.0)) throw InvalidArgument("stationary_law: tol must be > 0");

  // Log-space weights: lw(N) = log[(1/N) prod_{j=2}^{N-1} b/(d+jc)]. The
  // ratio w(N+1)/w(N) = (N/(N+1)) * b/(d+cN) eventually decays, so a mode
  // pass followed by a geometric tail bound terminates the support. Partial
  // sums are tracked with an incremental log-sum-exp against the running
  // maximum, which keeps everything finite for large b/c.
  constexpr std::size_t kHardCap = 1'000'000;
  const double log_tol = std::log(std::min(tol, 1e-15));

  std::vector<double> logw;
  logw.push_back(-std::log(2.0));  // N = 2
  double running_max = logw[0];
  double running_sum = 1.0;  // sum of exp(lw - running_max)
  double log_tail_bound = -std::numeric_limits<double>::infinity();
  while (true) {
    const double N = static_cast<double>(logw.size() + 1);  // current top of support
    const double ratio = (N / (N + 1.0)) * b / (d + c * N);
    const double next = logw.back() + std::log(ratio);
    if (ratio < 1.0) {
      // Everything past the current top is bounded by a geometric series
      // with this (decreasing) ratio.
      const double log_bound = next - std::log1p(-ratio);
      const double log_partial = running_max + std::log(running_sum);
      if (log_bound <= log_tol + log_partial || logw.size() >= kHardCap) {
        log_tail_bound = log_bound;
        break;
      }
    }
    if (logw.size() >= kHardCap) {
      log_tail_bound = next;
      break;
    }
    logw.push_back(next);
    if (next > running_max) {
      running_sum = running_sum * std::exp(running_max - next) + 1.0;
      running_max = next;
    } else {
      running_sum += std::exp(next - running_max);
    }
  }

  const double lw_max = running_max;

  StationaryLaw law;
  law.b = b;
  law.d = d;
  law.c = c;
  law.probs.resize(logw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    law.probs[i] = std::exp(logw[i] - lw_max);
    total += law.probs[i];
  }
  const double scaled_tail = std::exp(log_tail_bound - lw_max);
  total += scaled_tail;
  double mean = 0.0;
  for (std::size_t i = 0; i < law.probs.size(); ++i) {
    law.probs[i] /= total;
    mean += static_cast<double>(i + 2) * law.probs[i];
  }
  law.tail_mass = scaled_tail / total;
  law.mean = mean;
  return law;
}

int crossing_index(const StationaryLaw& at_d_lo, const StationaryLaw& at_d_hi) {
  if (at_d_lo.b != at_d_hi.b || at_d_lo.c != at_d_hi.c)
    throw InvalidArgument("crossing_index: laws must share (b, c)");
  if (!(at_d_hi.d > at_d_lo.d)) throw InvalidArgument("crossing_index: need d_hi > d_lo");

  const int n_top = std::min(at_d_lo.n_max(), at_d_hi.n_max());

  // q(N) = l(N, d_hi) / l(N, d_lo) satisfies q(N+1) = q(N) (d_lo+cN)/(d_hi+cN),
  // strictly decreasing, with q(2) > 1. Verify monotonicity where both laws
  // carry representable mass, then locate the unique sign change.
  double prev_q = 0.0;
  bool have_prev = false;
  for (int N = 2; N <= n_top; ++N) {
    const double lo = at_d_lo.at(N);
    const double hi = at_d_hi.at(N);
    if (lo < 1e-290 || hi < 1e-290) break;
    const double q = hi / lo;
    if (have_prev && !(q < prev_q))
      throw NumericalFailure("crossing_index: likelihood ratio not strictly decreasing");
    prev_q = q;
    have_prev = true;
  }

  int n0 = 0;
  int changes = 0;
  int prev_sign = 0;
  for (int N = 2; N <= n_top; ++N) {
    const double diff = at_d_hi.at(N) - at_d_lo.at(N);
    const int sign = diff >= 0.0 ? 1 : -1;
    if (sign > 0) n0 = N;
    if (prev_sign != 0 && sign != prev_sign) ++changes;
    prev_sign = sign;
  }
  if (changes != 1)
    throw NumericalFailure("crossing_index: expected exactly one sign change, found " +
                           std::to_string(changes));
  return n0;
}

void write_stationary_csv(std::ostream& os, const StationaryLaw& law) {
  os << "N,prob\n";
  for (std::size_t i = 0; i < law.probs.size(); ++i)
    os << (i + 2) << ',' << csv::num(law.probs[i]) << '\n';
}

}  // namespace vortex
