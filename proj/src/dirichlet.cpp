#include "vortex/dirichlet.hpp"

#include <cmath>
#include <ostream>

#include "vortex/csv.hpp"
#include "vortex/errors.hpp"

namespace vortex {

namespace {

// Compact system over interior states: P restricted to interior columns, plus
// the boundary contribution folded into the right-hand side.
struct InteriorSystem {
  JumpChainMatrix P;
  std::vector<double> absorb_a;          // per interior row: jump mass into Gamma_a
  std::vector<std::uint32_t> interior;   // interior rank -> lattice index
  std::vector<std::int64_t> rank;        // lattice index -> interior rank or -1
};

InteriorSystem assemble(const TruncatedLattice& lattice, const DemographicParams& params) {
  params.validate();
  const GeneralRates rates = GeneralRates::uniform(params);
  const std::size_t total = lattice.size();

  InteriorSystem sys;
  sys.rank.assign(total, -1);
  lattice.for_each([&](std::size_t idx, const PopulationState& s) {
    if (classify(s) == Region::Interior) {
      sys.rank[idx] = static_cast<std::int64_t>(sys.interior.size());
      sys.interior.push_back(static_cast<std::uint32_t>(idx));
    }
  });

  const std::size_t rows = sys.interior.size();
  sys.P.row_begin.assign(rows + 1, 0);
  sys.P.lower_end.assign(rows, 0);
  sys.absorb_a.assign(rows, 0.0);
  sys.P.col.reserve(rows * 4);
  sys.P.val.reserve(rows * 4);

  for (std::size_t row = 0; row < rows; ++row) {
    const PopulationState s = lattice.state(sys.interior[row]);
    TransitionSet ts = transitions(s, rates);
    if (s.size() == lattice.n_max()) {
      for (int e = 0; e < 3; ++e) ts[static_cast<std::size_t>(e)].rate = 0.0;  // wall
    }
    const double tot = total_rate(ts);
    if (!(tot > 0.0)) throw NumericalFailure("dirichlet: state with zero total rate");

    // Deaths first (lower level, hence lower index), then births: keeps the
    // CSR columns sorted in the level-major order.
    std::uint32_t lower = 0;
    for (int e = 3; e < 6; ++e) {
      const Transition& t = ts[static_cast<std::size_t>(e)];
      if (t.rate == 0.0) continue;
      const double pi = t.rate / tot;
      const std::size_t target_idx = lattice.index(t.target());
      const std::int64_t target_rank = sys.rank[target_idx];
      switch (classify(t.target())) {
        case Region::Gammaa: sys.absorb_a[row] += pi; break;
        case Region::GammaA: break;
        case Region::Interior:
          sys.P.col.push_back(static_cast<std::uint32_t>(target_rank));
          sys.P.val.push_back(pi);
          ++lower;
          break;
      }
    }
    for (int e = 0; e < 3; ++e) {
      const Transition& t = ts[static_cast<std::size_t>(e)];
      if (t.rate == 0.0) continue;
      const double pi = t.rate / tot;
      const std::size_t target_idx = lattice.index(t.target());
      const std::int64_t target_rank = sys.rank[target_idx];
      switch (classify(t.target())) {
        case Region::Gammaa: sys.absorb_a[row] += pi; break;
        case Region::GammaA: break;
        case Region::Interior:
          sys.P.col.push_back(static_cast<std::uint32_t>(target_rank));
          sys.P.val.push_back(pi);
          break;
      }
    }
    sys.P.lower_end[row] = lower;
    sys.P.row_begin[row + 1] = sys.P.col.size();
  }
  return sys;
}

std::vector<double> solve_interior(const InteriorSystem& sys, const std::vector<double>& rhs,
                                   std::vector<double> guess, const DirichletOptions& opts,
                                   double* residual_out) {
  LinearSolveOptions lopts;
  lopts.tol = opts.tol;
  lopts.max_iterations = opts.max_iterations;

  LinearSolveReport rep;
  for (int attempt = 0; attempt < 3; ++attempt) {
    rep = solve_fixed_point(sys.P, rhs, guess, lopts);
    if (rep.converged) break;
    lopts.max_polish_sweeps *= 4;  // restart resumes from the current iterate
  }
  if (!rep.converged) {
    throw NumericalFailure("dirichlet: linear solve did not reach residual " +
                           std::to_string(opts.tol));
  }
  if (residual_out != nullptr) *residual_out = rep.residual_inf;
  return guess;
}

std::vector<double> fixation_values(const TruncatedLattice& lattice,
                                    const DemographicParams& params,
                                    const DirichletOptions& opts, double* residual_out) {
  const InteriorSystem sys = assemble(lattice, params);

  // Neutral allele share is the exact solution at delta = delta_prime = 0 and
  // a first-order-accurate guess otherwise.
  std::vector<double> guess(sys.interior.size());
  for (std::size_t row = 0; row < guess.size(); ++row)
    guess[row] = neutral_fixation(lattice.state(sys.interior[row]));

  const std::vector<double> ui = solve_interior(sys, sys.absorb_a, std::move(guess), opts,
                                                residual_out);

  std::vector<double> u(lattice.size(), 0.0);
  lattice.for_each([&](std::size_t idx, const PopulationState& s) {
    switch (classify(s)) {
      case Region::Gammaa: u[idx] = 1.0; break;
      case Region::GammaA: u[idx] = 0.0; break;
      case Region::Interior: u[idx] = ui[static_cast<std::size_t>(sys.rank[idx])]; break;
    }
  });
  return u;
}

// Documented wall-error bound when no doubling run is requested: probability
// scale of ever climbing from n_max/2 to the wall, via the stationary-law
// ratios b / (d + jc), with a cushion for the number of upward excursions.
// The stationary tail is super-geometric, so this decays fast once the wall
// sits beyond the quasi-equilibrium size.
double tail_truncation_bound(const DemographicParams& p, int n_max) {
  double est = 10.0;
  for (int j = n_max / 2; j < n_max; ++j) {
    est *= std::min(1.0, p.b / (p.d + p.c * static_cast<double>(j - 1)));
    if (est < 1e-300) return 0.0;
  }
  return std::min(est, 1.0);
}

}  // namespace

FixationTable solve_fixation(const DemographicParams& params, int n_max,
                             const DirichletOptions& opts) {
  if (n_max < 4) throw InvalidArgument("solve_fixation: n_max must be >= 4");
  TruncatedLattice lattice(n_max);

  double residual = 0.0;
  std::vector<double> u = fixation_values(lattice, params, opts, &residual);

  double trunc = 0.0;
  if (opts.refine) {
    TruncatedLattice fine(2 * n_max);
    DirichletOptions fine_opts = opts;
    fine_opts.refine = false;
    double fine_resid = 0.0;
    const std::vector<double> uf = fixation_values(fine, params, fine_opts, &fine_resid);
    lattice.for_each([&](std::size_t idx, const PopulationState& s) {
      if (s.size() <= n_max / 2)
        trunc = std::max(trunc, std::fabs(u[idx] - uf[fine.index(s)]));
    });
  } else {
    trunc = tail_truncation_bound(params, n_max);
  }

  return FixationTable{std::move(lattice), params, std::move(u), residual, trunc};
}

HittingTimeTable solve_mean_steps(const DemographicParams& params, int n_max,
                                  const DirichletOptions& opts) {
  if (n_max < 4) throw InvalidArgument("solve_mean_steps: n_max must be >= 4");
  TruncatedLattice lattice(n_max);
  const InteriorSystem sys = assemble(lattice, params);

  const std::vector<double> ones(sys.interior.size(), 1.0);
  std::vector<double> guess(sys.interior.size());
  for (std::size_t row = 0; row < guess.size(); ++row)
    guess[row] = 3.0 * static_cast<double>(lattice.state(sys.interior[row]).size());

  double residual = 0.0;
  const std::vector<double> ti = solve_interior(sys, ones, std::move(guess), opts, &residual);

  std::vector<double> t(lattice.size(), 0.0);
  lattice.for_each([&](std::size_t idx, const PopulationState& s) {
    if (classify(s) == Region::Interior) t[idx] = ti[static_cast<std::size_t>(sys.rank[idx])];
  });
  return HittingTimeTable{std::move(lattice), params, std::move(t), residual};
}

FdGradientTable fd_gradient_table(const DemographicParams& params, double h, int n_max,
                                  const DirichletOptions& opts) {
  params.validate();
  if (h <= 0.0) h = 1e-3 * std::max(1.0, params.d);
  if (params.d - h < 0.0)
    throw InvalidArgument("fd_gradient: need d >= h so perturbed death rates stay nonnegative");

  DemographicParams base = params;
  base.delta = 0.0;
  base.delta_prime = 0.0;

  auto solve_at = [&](double delta, double delta_prime) {
    DemographicParams p = base;
    p.delta = delta;
    p.delta_prime = delta_prime;
    TruncatedLattice lattice(n_max);
    double resid = 0.0;
    return fixation_values(lattice, p, opts, &resid);
  };

  const std::vector<double> up = solve_at(h, 0.0);
  const std::vector<double> um = solve_at(-h, 0.0);
  const std::vector<double> upp = solve_at(0.0, h);
  const std::vector<double> upm = solve_at(0.0, -h);

  TruncatedLattice lattice(n_max);
  FdGradientTable table{std::move(lattice), h, std::vector<double>(up.size()),
                        std::vector<double>(up.size())};
  for (std::size_t i = 0; i < up.size(); ++i) {
    table.v[i] = -(up[i] - um[i]) / (2.0 * h);
    table.v_prime[i] = -(upp[i] - upm[i]) / (2.0 * h);
  }
  return table;
}

FdGradient fd_gradient(const DemographicParams& params, const PopulationState& s, double h,
                       int n_max, const DirichletOptions& opts) {
  const FdGradientTable table = fd_gradient_table(params, h, n_max, opts);
  return {table.v_at(s), table.v_prime_at(s)};
}

void write_fixation_csv(std::ostream& os, const FixationTable& table) {
  os << "k,m,n,u\n";
  table.lattice.for_each([&](std::size_t idx, const PopulationState& s) {
    os << s.k << ',' << s.m << ',' << s.n << ',' << csv::num(table.u[idx]) << '\n';
  });
}

}  // namespace vortex
