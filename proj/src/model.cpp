#include "vortex/model.hpp"

namespace vortex {

std::string_view event_name(EventType e) {
  switch (e) {
    case EventType::BirthAA: return "birth-AA";
    case EventType::BirthAa: return "birth-Aa";
    case EventType::Birthaa: return "birth-aa";
    case EventType::DeathAA: return "death-AA";
    case EventType::DeathAa: return "death-Aa";
    case EventType::Deathaa: return "death-aa";
  }
  return "?";
}

std::array<double, 3> birth_rates(const PopulationState& s, const GeneralRates& r) {
  const double k = static_cast<double>(s.k);
  const double m = static_cast<double>(s.m);
  const double n = static_cast<double>(s.n);
  const double inv = 1.0 / static_cast<double>(s.size() - 1);

  const double b1 =
      (r.birth[0][0] * k * (k - 1) + r.birth[0][1] * k * m + r.birth[1][1] * m * (m - 1) / 4.0) *
      inv;
  const double b2 = (r.birth[0][1] * k * m + r.birth[1][1] * m * (m - 1) / 2.0 +
                     r.birth[1][2] * m * n + r.birth[0][2] * 2.0 * k * n) *
                    inv;
  const double b3 =
      (r.birth[2][2] * n * (n - 1) + r.birth[1][2] * m * n + r.birth[1][1] * m * (m - 1) / 4.0) *
      inv;
  return {b1, b2, b3};
}

std::array<double, 3> death_rates(const PopulationState& s, const GeneralRates& r) {
  if (s.size() == 2) return {0.0, 0.0, 0.0};
  const double k = static_cast<double>(s.k);
  const double m = static_cast<double>(s.m);
  const double n = static_cast<double>(s.n);

  const double d1 = (r.death[0] + r.comp[0][0] * (k - 1) + r.comp[1][0] * m + r.comp[2][0] * n) * k;
  const double d2 = (r.death[1] + r.comp[0][1] * k + r.comp[1][1] * (m - 1) + r.comp[2][1] * n) * m;
  const double d3 = (r.death[2] + r.comp[0][2] * k + r.comp[1][2] * m + r.comp[2][2] * (n - 1)) * n;
  return {d1, d2, d3};
}

TransitionSet transitions(const PopulationState& s, const GeneralRates& r) {
  const auto b = birth_rates(s, r);
  const auto d = death_rates(s, r);
  return TransitionSet{{
      {EventType::BirthAA, s.k + 1, s.m, s.n, b[0]},
      {EventType::BirthAa, s.k, s.m + 1, s.n, b[1]},
      {EventType::Birthaa, s.k, s.m, s.n + 1, b[2]},
      {EventType::DeathAA, s.k - 1, s.m, s.n, d[0]},
      {EventType::DeathAa, s.k, s.m - 1, s.n, d[1]},
      {EventType::Deathaa, s.k, s.m, s.n - 1, d[2]},
  }};
}

double total_rate(const TransitionSet& ts) {
  double acc = 0.0;
  for (const Transition& t : ts) acc += t.rate;
  return acc;
}

Region classify(const PopulationState& s) {
  if (s.m == 0 && s.n == 0) return Region::GammaA;
  if (s.k == 0 && s.m == 0) return Region::Gammaa;
  return Region::Interior;
}

double neutral_fixation(const PopulationState& s) {
  return static_cast<double>(s.m + 2 * s.n) / static_cast<double>(2 * s.size());
}

}  // namespace vortex
