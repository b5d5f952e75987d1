#ifndef VORTEX_LATTICE_HPP
#define VORTEX_LATTICE_HPP

#include <cstddef>
#include <vector>

#include "vortex/errors.hpp"
#include "vortex/model.hpp"

namespace vortex {

// Bijective index over the truncated state space
// { (k,m,n) : 2 <= k+m+n <= n_max }.
// States are ordered by population size N, then lexicographically by (k, m).
// Size ordering matters: every transition changes N by exactly one, so the
// jump-chain matrix indexed this way splits into a strictly lower part
// (deaths) and a strictly upper part (births).
class TruncatedLattice {
 public:
  explicit TruncatedLattice(int n_max) : n_max_(n_max) {
    if (n_max < 4) throw InvalidArgument("TruncatedLattice: n_max must be >= 4");
    level_offset_.resize(static_cast<std::size_t>(n_max_) + 2, 0);
    std::size_t acc = 0;
    for (int N = 2; N <= n_max_; ++N) {
      level_offset_[static_cast<std::size_t>(N)] = acc;
      acc += level_size(N);
    }
    level_offset_[static_cast<std::size_t>(n_max_) + 1] = acc;
    size_ = acc;
  }

  int n_max() const { return n_max_; }
  std::size_t size() const { return size_; }

  static std::size_t level_size(int N) {
    return static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(N + 2) / 2;
  }

  std::size_t level_offset(int N) const { return level_offset_[static_cast<std::size_t>(N)]; }

  bool contains(const PopulationState& s) const { return s.size() <= n_max_; }

  std::size_t index(const PopulationState& s) const {
    const long long N = s.size();
    if (N > n_max_) throw InvalidArgument("TruncatedLattice: state above n_max");
    // Position of (k, m) inside level N: all states with smaller k first,
    // k' = 0..k-1 contributing N - k' + 1 entries each, then m.
    const long long pos = s.k * (N + 1) - s.k * (s.k - 1) / 2 + s.m;
    return level_offset_[static_cast<std::size_t>(N)] + static_cast<std::size_t>(pos);
  }

  PopulationState state(std::size_t idx) const {
    if (idx >= size_) throw InvalidArgument("TruncatedLattice: index out of range");
    int N = 2;
    while (level_offset_[static_cast<std::size_t>(N) + 1] <= idx) ++N;
    long long pos = static_cast<long long>(idx - level_offset_[static_cast<std::size_t>(N)]);
    long long k = 0;
    while (pos >= N - k + 1) {
      pos -= N - k + 1;
      ++k;
    }
    const long long m = pos;
    return {k, m, N - k - m};
  }

  template <typename F>
  void for_each(F&& f) const {
    for (int N = 2; N <= n_max_; ++N) {
      std::size_t idx = level_offset_[static_cast<std::size_t>(N)];
      for (long long k = 0; k <= N; ++k) {
        for (long long m = 0; m + k <= N; ++m, ++idx) {
          f(idx, PopulationState{k, m, N - k - m});
        }
      }
    }
  }

 private:
  int n_max_;
  std::size_t size_ = 0;
  std::vector<std::size_t> level_offset_;
};

}  // namespace vortex

#endif
