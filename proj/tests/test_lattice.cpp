#include "doctest.h"
#include "vortex/lattice.hpp"

using namespace vortex;

TEST_CASE("lattice size matches the level-count formula") {
  for (int n_max : {4, 7, 20}) {
    TruncatedLattice lat(n_max);
    std::size_t expected = 0;
    for (int N = 2; N <= n_max; ++N)
      expected += static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(N + 2) / 2;
    CHECK(lat.size() == expected);
  }
  CHECK_THROWS_AS(TruncatedLattice(3), InvalidArgument);
}

TEST_CASE("index and state round-trip over the whole lattice") {
  TruncatedLattice lat(12);
  std::size_t seen = 0;
  lat.for_each([&](std::size_t idx, const PopulationState& s) {
    CHECK(lat.index(s) == idx);
    const PopulationState back = lat.state(idx);
    CHECK(back == s);
    ++seen;
  });
  CHECK(seen == lat.size());
  CHECK_THROWS_AS(lat.index({13, 0, 0}), InvalidArgument);
  CHECK_THROWS_AS(lat.state(lat.size()), InvalidArgument);
}

TEST_CASE("lattice ordering is by population size") {
  TruncatedLattice lat(9);
  std::size_t prev_size = 2;
  lat.for_each([&](std::size_t, const PopulationState& s) {
    CHECK(static_cast<std::size_t>(s.size()) >= prev_size);
    prev_size = static_cast<std::size_t>(s.size());
  });
}
