#include "vortex/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "vortex/csv.hpp"
#include "vortex/errors.hpp"
#include "vortex/stationary.hpp"

namespace vortex {

namespace {

constexpr double kCondLimit = 4.5e12;  // pivot condition beyond which F_N counts as singular

bool finite(const Mat2& m) {
  return std::isfinite(m.a11) && std::isfinite(m.a12) && std::isfinite(m.a21) &&
         std::isfinite(m.a22);
}
bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace

LayerMatrices first_layer(int N, const DemographicParams& p) {
  if (N < 3) throw InvalidArgument("first_layer: N must be >= 3");
  const double Nd = N;
  const double sB = p.b / (2.0 * (Nd - 1.0) * (Nd + 1.0));
  LayerMatrices out;
  out.B = Mat2{1.0, (2.0 * Nd * Nd + 4.0 * Nd - 3.0) / (Nd + 1.0),
               2.0 * Nd * Nd - 3.0, -3.0 / (Nd + 1.0)} *
          sB;
  out.C = Mat2{0.0, 1.0 / Nd, 1.0, 0.0} * (p.b + p.d + p.c * (Nd - 1.0));
  out.D = Mat2{0.0, (Nd - 3.0) / (Nd - 1.0), Nd - 2.0, 3.0 / (Nd - 1.0)} *
          (-(p.d + p.c * (Nd - 1.0)) / (Nd - 1.0));
  out.f = Vec2{0.0, -1.0 / (2.0 * Nd * (Nd - 1.0))};
  return out;
}

Mat2 first_layer_c3_tilde(const DemographicParams& p) {
  const double dc = p.d + 2.0 * p.c;
  return first_layer(3, p).C - Mat2{0.0, 0.0, (2.0 / 3.0) * dc, dc};
}

Vec2 first_layer_f3_tilde(int, const DemographicParams& p) {
  // The bottom source is unchanged by folding the N = 2 constraint into C_3.
  return first_layer(3, p).f;
}

LayerMatrices second_layer(int N, const DemographicParams& p, double y_minus, double y_mid,
                           double y_plus) {
  if (N < 3) throw InvalidArgument("second_layer: N must be >= 3");
  const double Nd = N;
  const double down = p.d + p.c * (Nd - 1.0);  // per-capita death rate
  const double total = Nd * (p.b + down);      // total event rate at size N

  LayerMatrices out;
  out.B = Mat2{2.0 * Nd * Nd - 2.0 * Nd - 1.0, -1.0 / (Nd + 1.0),
               0.5, (Nd * Nd + Nd - 1.5) / (Nd + 1.0)} *
          (p.b / (Nd - 1.0));
  out.C = Mat2{2.0, 0.0, 0.0, 1.0 / Nd} * total;
  out.D = Mat2{2.0 * (Nd - 1.0), 2.0 / (Nd - 1.0), 0.0, (Nd - 2.0) / (Nd - 1.0)} * (-down);

  const double up_w = y_plus / (2.0 * (Nd + 1.0) * (Nd + 1.0));
  const double mid_w = y_mid / (2.0 * Nd * Nd);
  const double dn_w = y_minus / (2.0 * (Nd - 1.0) * (Nd - 1.0));
  out.f = Vec2{
      (p.b / (Nd - 1.0)) * (2.0 * Nd - 1.0) * up_w - down * (4.0 * Nd + 2.0) * dn_w,
      (p.b / (Nd - 1.0)) * (2.0 * Nd * Nd * Nd + 3.0 * Nd * Nd - 4.0 * Nd - 1.5) * up_w -
          total * (2.0 * Nd - 1.0) * mid_w +
          down * (2.0 * Nd * Nd - 7.0 * Nd + 8.0) * dn_w,
  };
  return out;
}

Mat2 second_layer_b2_tilde() { return {1.0, 3.0, 3.0, 13.0 / 3.0}; }
Mat2 second_layer_c2_tilde() { return {0.0, 2.0, 2.0, 3.0}; }

Vec2 second_layer_f2_tilde(double x2, double y2, double x3, double y3) {
  return {x2 - y2 - x3 + 1.5 * y3, (19.0 / 6.0) * y3 - 2.25 * y2};
}

double PerturbationTables::x_at(long long N) const {
  if (N < 3 || N > n_max) throw InvalidArgument("PerturbationTables: N outside table range");
  return x[static_cast<std::size_t>(N - 3)];
}
double PerturbationTables::y_at(long long N) const {
  if (N < 3 || N > n_max) throw InvalidArgument("PerturbationTables: N outside table range");
  return y[static_cast<std::size_t>(N - 3)];
}
double PerturbationTables::xp_at(long long N) const {
  if (N < 2 || N > n_max) throw InvalidArgument("PerturbationTables: N outside table range");
  return xp[static_cast<std::size_t>(N - 2)];
}
double PerturbationTables::yp_at(long long N) const {
  if (N < 2 || N > n_max) throw InvalidArgument("PerturbationTables: N outside table range");
  return yp[static_cast<std::size_t>(N - 2)];
}

namespace {

// Depth-independent forward elimination state of the first layer, extended on
// demand: K_N, M_N^{-1} = F_N^{-1} B_N and the accumulated source g_N.
struct ForwardCache {
  DemographicParams params;
  std::vector<Mat2> K, Minv;  // index i holds N = 3 + i
  std::vector<Vec2> g;
  std::vector<Mat2> Kp, Mpinv;  // primed layer pivots (source-independent)

  void extend_first(int depth) {
    while (static_cast<int>(K.size()) + 2 < depth) {
      const int N = static_cast<int>(K.size()) + 3;
      const LayerMatrices lm = first_layer(N, params);
      Mat2 KN;
      Vec2 gN;
      if (N == 3) {
        KN = first_layer_c3_tilde(params) - lm.C;
        gN = lm.B.inverse() * first_layer_f3_tilde(3, params);
      } else {
        const Mat2& Kprev = K.back();
        const LayerMatrices prev = first_layer(N - 1, params);
        const Mat2 Fprev = prev.C + Kprev;
        check_pivot(Fprev, N - 1);
        KN = lm.D * (Fprev.inverse() * prev.B);
        gN = lm.B.inverse() * (lm.f - KN * g.back());
      }
      const Mat2 F = lm.C + KN;
      check_pivot(F, N);
      const Mat2 MinvN = F.inverse() * lm.B;
      if (!finite(KN) || !finite(gN) || !finite(MinvN))
        throw NumericalFailure("recurrence: forward elimination produced non-finite values");
      K.push_back(KN);
      Minv.push_back(MinvN);
      g.push_back(gN);
    }
  }

  void extend_second(int depth) {
    while (static_cast<int>(Kp.size()) + 2 < depth) {
      const int N = static_cast<int>(Kp.size()) + 3;
      const LayerMatrices lm = second_layer(N, params, 0.0, 0.0, 0.0);
      Mat2 KN;
      if (N == 3) {
        KN = lm.D * (second_layer_c2_tilde().inverse() * second_layer_b2_tilde());
      } else {
        const LayerMatrices prev = second_layer(N - 1, params, 0.0, 0.0, 0.0);
        const Mat2 Fprev = prev.C + Kp.back();
        check_pivot(Fprev, N - 1);
        KN = lm.D * (Fprev.inverse() * prev.B);
      }
      const Mat2 F = lm.C + KN;
      check_pivot(F, N);
      const Mat2 MinvN = F.inverse() * lm.B;
      if (!finite(KN) || !finite(MinvN))
        throw NumericalFailure("recurrence: primed forward elimination non-finite");
      Kp.push_back(KN);
      Mpinv.push_back(MinvN);
    }
  }

  static void check_pivot(const Mat2& F, int N) {
    if (!finite(F) || F.condition_estimate() > kCondLimit)
      throw NumericalFailure("recurrence: pivot F_" + std::to_string(N) +
                             " numerically singular; parameters outside the tail method's range");
  }
};

struct DepthSolution {
  double s2 = 0.0;
  std::vector<double> x, y;    // N = 3..n_store
  std::vector<double> xp, yp;  // N = 2..n_max
  double h3_split_diff = 0.0;
  double vprime_n2_split_diff = 0.0;
};

double vprime_n2(double x2, double y2, const Vec2& z2p, const PopulationState& s) {
  const double Y = static_cast<double>(s.alleles_A());
  const double nn = static_cast<double>(s.n);
  const double mm = static_cast<double>(s.m);
  return (nn * Y / 2.0) * x2 + mm * z2p.x + Y * (4.0 - Y) * (z2p.y / 2.0 - Y / 8.0 * y2);
}

// One full evaluation at backward-tail depth L: first layer truncated at
// L + 1, primed layer at L. All per-depth work is O(L) 2x2 operations.
DepthSolution solve_at_depth(ForwardCache& cache, int n_max, int L) {
  const DemographicParams& p = cache.params;
  const int L1 = L + 1;
  cache.extend_first(L1);
  cache.extend_second(L);

  DepthSolution sol;
  const int n_store1 = L1;  // first-layer values kept up to the full depth
  sol.x.assign(static_cast<std::size_t>(n_store1 - 2), 0.0);
  sol.y.assign(static_cast<std::size_t>(n_store1 - 2), 0.0);

  Vec2 S{0.0, 0.0};
  for (int N = L1; N >= 3; --N) {
    S = cache.Minv[static_cast<std::size_t>(N - 3)] * (cache.g[static_cast<std::size_t>(N - 3)] + S);
    if (!finite(S)) throw NumericalFailure("recurrence: backward tail non-finite");
    sol.x[static_cast<std::size_t>(N - 3)] = -S.x;
    sol.y[static_cast<std::size_t>(N - 3)] = -S.y;
  }
  sol.s2 = (4.0 / 3.0) * sol.x[0] + 2.0 * sol.y[0];

  auto y_at = [&](int N) -> double {
    return N == 2 ? 0.0 : sol.y[static_cast<std::size_t>(N - 3)];  // split y_2 folded in below
  };

  // Primed layer under a given (x_2, y_2) split of s2. The reduced bottom
  // source h_3 and every reported value are invariant under the split; the
  // solve is run twice to measure that invariance.
  auto solve_primed = [&](double x2, double y2, Vec2* h3_out) {
    const Mat2 c2t_inv = second_layer_c2_tilde().inverse();
    const Vec2 f2t = second_layer_f2_tilde(x2, y2, sol.x[0], sol.y[0]);

    std::vector<Vec2> gp(static_cast<std::size_t>(L - 2));
    for (int N = 3; N <= L; ++N) {
      const double ym = (N == 3) ? y2 : y_at(N - 1);
      const LayerMatrices lm = second_layer(N, p, ym, y_at(N), y_at(N + 1));
      Vec2 h = lm.f;
      if (N == 3) {
        h = h - second_layer(3, p, 0, 0, 0).D * (c2t_inv * f2t);
        if (h3_out != nullptr) *h3_out = h;
      }
      if (N == 3) {
        gp[0] = lm.B.inverse() * h;
      } else {
        gp[static_cast<std::size_t>(N - 3)] =
            lm.B.inverse() * (h - cache.Kp[static_cast<std::size_t>(N - 3)] *
                                      gp[static_cast<std::size_t>(N - 4)]);
      }
      if (!finite(gp[static_cast<std::size_t>(N - 3)]))
        throw NumericalFailure("recurrence: primed source accumulation non-finite");
    }

    std::vector<Vec2> zp(static_cast<std::size_t>(L - 1));  // N = 2..L
    Vec2 Sp{0.0, 0.0};
    for (int N = L; N >= 3; --N) {
      Sp = cache.Mpinv[static_cast<std::size_t>(N - 3)] *
           (gp[static_cast<std::size_t>(N - 3)] + Sp);
      if (!finite(Sp)) throw NumericalFailure("recurrence: primed backward tail non-finite");
      zp[static_cast<std::size_t>(N - 2)] = -Sp;
    }
    zp[0] = c2t_inv * (second_layer_b2_tilde() * zp[1] - f2t);
    return zp;
  };

  Vec2 h3_a{}, h3_b{};
  const std::vector<Vec2> zp = solve_primed(sol.s2, 0.0, &h3_a);
  const std::vector<Vec2> zp_alt = solve_primed(sol.s2 - 1.5, 1.0, &h3_b);

  sol.h3_split_diff = (h3_a - h3_b).sup_norm() / (1.0 + h3_a.sup_norm());
  double vdiff = 0.0;
  for (const PopulationState probe : {PopulationState{1, 1, 0}, PopulationState{1, 0, 1},
                                      PopulationState{0, 2, 0}, PopulationState{0, 1, 1}}) {
    const double a = vprime_n2(sol.s2, 0.0, zp[0], probe);
    const double b = vprime_n2(sol.s2 - 1.5, 1.0, zp_alt[0], probe);
    vdiff = std::max(vdiff, std::fabs(a - b) / (1.0 + std::fabs(a)));
  }
  sol.vprime_n2_split_diff = vdiff;

  sol.xp.resize(static_cast<std::size_t>(n_max - 1));
  sol.yp.resize(static_cast<std::size_t>(n_max - 1));
  for (int N = 2; N <= n_max; ++N) {
    sol.xp[static_cast<std::size_t>(N - 2)] = zp[static_cast<std::size_t>(N - 2)].x;
    sol.yp[static_cast<std::size_t>(N - 2)] = zp[static_cast<std::size_t>(N - 2)].y;
  }
  return sol;
}

double solution_diff(const DepthSolution& a, const DepthSolution& b, int n_max) {
  double diff = std::fabs(a.s2 - b.s2);
  for (int N = 3; N <= n_max; ++N) {
    diff = std::max(diff, std::fabs(a.x[static_cast<std::size_t>(N - 3)] -
                                    b.x[static_cast<std::size_t>(N - 3)]));
    diff = std::max(diff, std::fabs(a.y[static_cast<std::size_t>(N - 3)] -
                                    b.y[static_cast<std::size_t>(N - 3)]));
  }
  for (int N = 2; N <= n_max; ++N) {
    diff = std::max(diff, std::fabs(a.xp[static_cast<std::size_t>(N - 2)] -
                                    b.xp[static_cast<std::size_t>(N - 2)]));
    diff = std::max(diff, std::fabs(a.yp[static_cast<std::size_t>(N - 2)] -
                                    b.yp[static_cast<std::size_t>(N - 2)]));
  }
  return diff;
}

struct ConvergedSolution {
  DepthSolution sol;
  int depth = 0;
  double tail_residual = 0.0;
};

ConvergedSolution run_depth_loop(ForwardCache& cache, int n_max, double tol, int l_max) {
  const int step = std::max(40, n_max / 4);
  int L = std::max(n_max + step, 60);
  if (L > l_max)
    throw NumericalFailure("recurrence: depth cap below the minimum usable depth");

  DepthSolution prev = solve_at_depth(cache, n_max, L);
  double prev_diff = std::numeric_limits<double>::infinity();
  int stalls = 0;
  while (true) {
    const int L_next = std::min(L + step, l_max);
    if (L_next == L)
      throw NumericalFailure(
          "recurrence: backward tail not converged within the depth cap; "
          "fecundity too large for the tail method");
    DepthSolution cur = solve_at_depth(cache, n_max, L_next);
    const double diff = solution_diff(prev, cur, n_max);
    if (diff <= 0.25 * tol) {
      return {std::move(cur), L_next, diff};
    }
    if (!(diff < 0.9 * prev_diff)) {
      if (++stalls >= 4)
        throw NumericalFailure(
            "recurrence: backward tail stalled above tolerance; "
            "roundoff amplification dominates (large b/c)");
    } else {
      stalls = 0;
    }
    prev = std::move(cur);
    prev_diff = diff;
    L = L_next;
  }
}

// Residuals of the original two-level systems over the stored range.
void verify_residuals(const DemographicParams& p, PerturbationTables& t, double tol) {
  double r1 = 0.0;
  for (int N = 3; N + 1 <= t.n_max; ++N) {
    const LayerMatrices lm = first_layer(N, p);
    const Vec2 zn{t.x_at(N), t.y_at(N)};
    const Vec2 znp{t.x_at(N + 1), t.y_at(N + 1)};
    Vec2 r;
    if (N == 3) {
      r = lm.B * znp - first_layer_c3_tilde(p) * zn - first_layer_f3_tilde(3, p);
    } else {
      const Vec2 znm{t.x_at(N - 1), t.y_at(N - 1)};
      r = lm.B * znp - lm.C * zn - lm.D * znm - lm.f;
    }
    r1 = std::max(r1, r.sup_norm());
  }

  auto y_of = [&](int N) { return N == 2 ? t.y2_split() : t.y_at(N); };
  double r2 = (second_layer_b2_tilde() * Vec2{t.xp_at(3), t.yp_at(3)} -
               second_layer_c2_tilde() * Vec2{t.xp_at(2), t.yp_at(2)} -
               second_layer_f2_tilde(t.x2_split(), t.y2_split(), t.x_at(3), t.y_at(3)))
                  .sup_norm();
  for (int N = 3; N + 1 <= t.n_max; ++N) {
    const LayerMatrices lm = second_layer(N, p, y_of(N - 1), y_of(N), y_of(N + 1));
    const Vec2 r = lm.B * Vec2{t.xp_at(N + 1), t.yp_at(N + 1)} -
                   lm.C * Vec2{t.xp_at(N), t.yp_at(N)} -
                   lm.D * Vec2{t.xp_at(N - 1), t.yp_at(N - 1)} - lm.f;
    r2 = std::max(r2, r.sup_norm());
  }

  t.diagnostics.max_residual_first = r1;
  t.diagnostics.max_residual_second = r2;
  if (r1 > tol || r2 > tol)
    throw NumericalFailure("recurrence: residual above tolerance after tail convergence");
}

void fill_diagnostics(const ForwardCache& cache, PerturbationTables& t) {
  const DemographicParams& p = cache.params;
  t.diagnostics.rows.clear();
  for (int N = 3; N <= t.n_max; ++N) {
    const std::size_t i = static_cast<std::size_t>(N - 3);
    const LayerMatrices lm = first_layer(N, p);
    const Mat2 F = lm.C + cache.K[i];
    const Mat2 V{0.0, 1.0 / static_cast<double>(N), 1.0, 0.0};
    SolverDiagnostics::Row row;
    row.N = N;
    row.norm_K = cache.K[i].row_sup_norm();
    row.norm_G = (V + cache.K[i] * (1.0 / p.b)).row_sup_norm();
    row.cond_F = F.condition_estimate();
    row.norm_Minv_scaled =
        cache.Minv[i].row_sup_norm() * p.c * static_cast<double>(N) / (2.0 * p.b);
    t.diagnostics.rows.push_back(row);
  }
}

PerturbationTables tables_via_recurrence(const DemographicParams& params, int n_max,
                                         const RecurrenceOptions& opts) {
  const int l_max = opts.l_max > 0 ? opts.l_max : 10 * n_max + 1000;
  ForwardCache cache{params, {}, {}, {}, {}, {}};
  ConvergedSolution conv = run_depth_loop(cache, n_max, opts.tol, l_max);

  PerturbationTables t;
  t.params = params;
  t.n_max = n_max;
  t.s2 = conv.sol.s2;
  t.x.assign(conv.sol.x.begin(), conv.sol.x.begin() + (n_max - 2));
  t.y.assign(conv.sol.y.begin(), conv.sol.y.begin() + (n_max - 2));
  t.xp = std::move(conv.sol.xp);
  t.yp = std::move(conv.sol.yp);
  t.method = TableMethod::Recurrence;
  t.achieved_tol = opts.tol;
  t.diagnostics.tail_depth = conv.depth;
  t.diagnostics.tail_residual = conv.tail_residual;
  t.diagnostics.h3_split_diff = conv.sol.h3_split_diff;
  t.diagnostics.vprime_n2_split_diff = conv.sol.vprime_n2_split_diff;
  verify_residuals(params, t, opts.tol);
  fill_diagnostics(cache, t);
  return t;
}

PerturbationTables tables_via_dirichlet(const DemographicParams& params, int n_max,
                                        const RecurrenceOptions& opts) {
  DemographicParams p = params;
  p.delta = 0.0;
  p.delta_prime = 0.0;
  const double step = opts.fd_step > 0.0 ? opts.fd_step : 1e-3;
  const double h = step * std::max(1.0, p.d);
  // The wall must sit well beyond both the requested table range and the
  // quasi-equilibrium population size, or the extracted values inherit
  // truncation bias.
  const int support = stationary_law(p.b, p.d, p.c, 1e-10).n_max();
  const int lattice_n =
      std::max(n_max, support) + std::max(opts.fallback_lattice_margin, n_max / 4);
  if (lattice_n > 500)
    throw NumericalFailure("perturbation fallback: extraction lattice of " +
                           std::to_string(lattice_n) +
                           " levels is not tractable; b/c outside the supported range");
  const FdGradientTable fd = fd_gradient_table(p, h, lattice_n);

  PerturbationTables t;
  t.params = params;
  t.n_max = n_max;
  t.method = TableMethod::DirichletInversion;
  t.achieved_tol = h * h;  // central-difference scale; the dominant error term
  t.s2 = 2.0 * fd.v_at({1, 1, 0});
  t.x.resize(static_cast<std::size_t>(n_max - 2));
  t.y.resize(static_cast<std::size_t>(n_max - 2));
  t.xp.resize(static_cast<std::size_t>(n_max - 1));
  t.yp.resize(static_cast<std::size_t>(n_max - 1));

  // Inversion of the closed forms at the probe states (N-1,1,0), (N-1,0,1).
  for (int N = 3; N <= n_max; ++N) {
    const double Nd = N;
    const double v10 = fd.v_at({N - 1, 1, 0});
    const double v01 = fd.v_at({N - 1, 0, 1});
    const double yN = Nd * Nd / (4.0 * (Nd - 2.0) * (Nd - 1.0)) * v01;
    const double xN = Nd / (Nd - 1.0) * (v10 - (2.0 * Nd - 1.0) / (4.0 * (Nd - 2.0)) * v01);
    t.x[static_cast<std::size_t>(N - 3)] = xN;
    t.y[static_cast<std::size_t>(N - 3)] = yN;

    const double vp10 = fd.v_prime_at({N - 1, 1, 0});
    const double vp01 = fd.v_prime_at({N - 1, 0, 1});
    const double Ya = 2.0 * Nd - 2.0;  // A alleles at (N-1,0,1)
    const double ypN =
        (vp01 - (Ya / Nd) * xN + (Ya * Ya / (Nd * Nd)) * yN) * Nd / (2.0 * Ya);
    const double Yb = 2.0 * Nd - 1.0;  // A alleles at (N-1,1,0)
    const double xpN = vp10 - (Yb / Nd) * ypN + (Yb * Yb / (2.0 * Nd * Nd)) * yN;
    t.xp[static_cast<std::size_t>(N - 2)] = xpN;
    t.yp[static_cast<std::size_t>(N - 2)] = ypN;
  }
  t.yp[0] = 0.5 * (fd.v_prime_at({1, 0, 1}) - t.s2);
  t.xp[0] = fd.v_prime_at({1, 1, 0}) - 1.5 * t.yp[0];
  return t;
}

}  // namespace

ZTables solve_z(const DemographicParams& params, int n_max, double tol, int l_max) {
  params.validate();
  if (n_max < 4) throw InvalidArgument("solve_z: n_max must be >= 4");
  if (!(tol > 0.0)) throw InvalidArgument("solve_z: tol must be > 0");
  if (l_max <= 0) l_max = 10 * n_max + 1000;

  ForwardCache cache{params, {}, {}, {}, {}, {}};
  ConvergedSolution conv = run_depth_loop(cache, n_max, tol, l_max);

  ZTables z;
  z.n_max = n_max;
  z.s2 = conv.sol.s2;
  z.x.assign(conv.sol.x.begin(), conv.sol.x.begin() + (n_max - 2));
  z.y.assign(conv.sol.y.begin(), conv.sol.y.begin() + (n_max - 2));
  z.m_inv = cache.Minv;
  z.k = cache.K;
  z.g = cache.g;
  z.y_deep = conv.sol.y;
  z.tail_depth = conv.depth;
  z.tail_residual = conv.tail_residual;
  return z;
}

ZPrimeTables solve_z_prime(const DemographicParams& params, double tol, const ZTables& z,
                           int l_max) {
  params.validate();
  if (l_max <= 0) l_max = 10 * z.n_max + 1000;
  ForwardCache cache{params, {}, {}, {}, {}, {}};
  ConvergedSolution conv = run_depth_loop(cache, z.n_max, tol, l_max);
  ZPrimeTables out;
  out.n_max = z.n_max;
  out.xp = std::move(conv.sol.xp);
  out.yp = std::move(conv.sol.yp);
  out.h3_split_diff = conv.sol.h3_split_diff;
  out.vprime_n2_split_diff = conv.sol.vprime_n2_split_diff;
  out.tail_depth = conv.depth;
  out.tail_residual = conv.tail_residual;
  return out;
}

PerturbationTables solve_tables(const DemographicParams& params, int n_max,
                                const RecurrenceOptions& opts) {
  params.validate();
  if (n_max < 4) throw InvalidArgument("solve_tables: n_max must be >= 4");
  try {
    return tables_via_recurrence(params, n_max, opts);
  } catch (const NumericalFailure&) {
    if (!opts.allow_fallback) throw;
    return tables_via_dirichlet(params, n_max, opts);
  }
}

double v_value(const PopulationState& s, const PerturbationTables& t) {
  const long long N = s.size();
  if (N == 2) {
    if (s.k == 1 && s.m == 1 && s.n == 0) return 0.5 * t.s2;
    if (s.k == 0 && s.m == 1 && s.n == 1) return -0.5 * t.s2;
    return 0.0;
  }
  const double Nd = static_cast<double>(N);
  const double kn = static_cast<double>(s.k - s.n);
  return kn * (static_cast<double>(s.m) / Nd * t.x_at(N) +
               (Nd * Nd - kn * kn) / (Nd * Nd) * t.y_at(N));
}

double v_prime_value(const PopulationState& s, const PerturbationTables& t) {
  const long long N = s.size();
  const double Nd = static_cast<double>(N);
  const double Y = static_cast<double>(s.alleles_A());
  const double xN = (N == 2) ? t.x2_split() : t.x_at(N);
  const double yN = (N == 2) ? t.y2_split() : t.y_at(N);
  return static_cast<double>(s.n) * Y / Nd * xN + static_cast<double>(s.m) * t.xp_at(N) +
         Y * (2.0 * Nd - Y) * (t.yp_at(N) / Nd - Y / (2.0 * Nd * Nd) * yN);
}

FirstOrderFixation fixation_first_order(const PopulationState& s, const DemographicParams& params,
                                        const PerturbationTables& t) {
  const double raw = neutral_fixation(s) - params.delta * v_value(s, t) -
                     params.delta_prime * v_prime_value(s, t);
  return {raw, std::clamp(raw, 0.0, 1.0)};
}

const SolverDiagnostics& diagnostics(const PerturbationTables& t) { return t.diagnostics; }

void write_tables_csv(std::ostream& os, const PerturbationTables& t) {
  os << "N,x,y,xp,yp\n";
  os << "2,,," << csv::num(t.xp_at(2)) << ',' << csv::num(t.yp_at(2)) << '\n';
  for (int N = 3; N <= t.n_max; ++N) {
    os << N << ',' << csv::num(t.x_at(N)) << ',' << csv::num(t.y_at(N)) << ','
       << csv::num(t.xp_at(N)) << ',' << csv::num(t.yp_at(N)) << '\n';
  }
}

void write_diagnostics_csv(std::ostream& os, const PerturbationTables& t) {
  os << "N,normK,normG,condF\n";
  for (const auto& row : t.diagnostics.rows) {
    os << row.N << ',' << csv::num(row.norm_K) << ',' << csv::num(row.norm_G) << ','
       << csv::num(row.cond_F) << '\n';
  }
}

}  // namespace vortex
