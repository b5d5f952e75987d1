#include "vortex/sparse.hpp"

#include <cmath>
#include <limits>

#include "vortex/errors.hpp"

namespace vortex {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sup_norm(const std::vector<double>& a) {
  double mx = 0.0;
  for (double v : a) mx = std::max(mx, std::fabs(v));
  return mx;
}

// r = g + P u - u
void fixed_point_residual(const JumpChainMatrix& P, const std::vector<double>& g,
                          const std::vector<double>& u, std::vector<double>& r) {
  P.multiply(u, r);
  for (std::size_t i = 0; i < u.size(); ++i) r[i] += g[i] - u[i];
}

// Exact solve of (I - L) x = b where L is the strictly lower (death) part.
// Rows ascending; within-row lower entries all reference already-final x.
void lower_solve(const JumpChainMatrix& P, const std::vector<double>& b, std::vector<double>& x) {
  const std::size_t n = P.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[i];
    const std::size_t lo = P.row_begin[i];
    const std::size_t mid = P.row_begin[i] + P.lower_end[i];
    for (std::size_t t = lo; t < mid; ++t) acc += P.val[t] * x[P.col[t]];
    x[i] = acc;
  }
}

// Exact solve of (I - U) x = b where U is the strictly upper (birth) part.
void upper_solve(const JumpChainMatrix& P, const std::vector<double>& b, std::vector<double>& x) {
  const std::size_t n = P.rows();
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    const std::size_t mid = P.row_begin[i] + P.lower_end[i];
    const std::size_t hi = P.row_begin[i + 1];
    for (std::size_t t = mid; t < hi; ++t) acc += P.val[t] * x[P.col[t]];
    x[i] = acc;
  }
}

// Symmetric Gauss-Seidel preconditioner M = (I - L)(I - U); z = M^{-1} r.
void sgs_apply(const JumpChainMatrix& P, const std::vector<double>& r, std::vector<double>& tmp,
               std::vector<double>& z) {
  lower_solve(P, r, tmp);
  upper_solve(P, tmp, z);
}

// One in-place symmetric Gauss-Seidel sweep on the fixed-point form. Updates
// are convex combinations of current values and boundary data, so a sweep
// maps [lo,hi]-bounded vectors to [lo,hi]-bounded vectors.
void sgs_sweep(const JumpChainMatrix& P, const std::vector<double>& g, std::vector<double>& u) {
  const std::size_t n = P.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = g[i];
    for (std::size_t t = P.row_begin[i]; t < P.row_begin[i + 1]; ++t)
      acc += P.val[t] * u[P.col[t]];
    u[i] = acc;
  }
  for (std::size_t i = n; i-- > 0;) {
    double acc = g[i];
    for (std::size_t t = P.row_begin[i]; t < P.row_begin[i + 1]; ++t)
      acc += P.val[t] * u[P.col[t]];
    u[i] = acc;
  }
}

}  // namespace

void JumpChainMatrix::multiply(const std::vector<double>& x, std::vector<double>& out) const {
  const std::size_t n = rows();
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t t = row_begin[i]; t < row_begin[i + 1]; ++t) acc += val[t] * x[col[t]];
    out[i] = acc;
  }
}

LinearSolveReport solve_fixed_point(const JumpChainMatrix& P, const std::vector<double>& g,
                                    std::vector<double>& u, const LinearSolveOptions& opts) {
  const std::size_t n = P.rows();
  LinearSolveReport rep;
  if (n == 0) {
    rep.converged = true;
    return rep;
  }
  u.resize(n, 0.0);

  std::vector<double> r(n), r0(n), p(n), v(n), s(n), t(n), phat(n), shat(n), tmp(n);

  fixed_point_residual(P, g, u, r);
  double res = sup_norm(r);
  const double tol = opts.tol;

  if (res > tol) {
    // BiCGStab on (I - P) u = g, right-preconditioned with symmetric GS.
    r0 = r;
    double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    double best = res;
    int stall = 0;

    for (int it = 0; it < opts.max_iterations; ++it) {
      const double rho = dot(r0, r);
      if (!std::isfinite(rho) || std::fabs(rho) < 1e-290) break;  // breakdown -> fallback
      const double beta = (rho / rho_prev) * (alpha / omega);
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);

      sgs_apply(P, p, tmp, phat);
      P.multiply(phat, v);
      for (std::size_t i = 0; i < n; ++i) v[i] = phat[i] - v[i];  // v = (I-P) phat

      const double r0v = dot(r0, v);
      if (!std::isfinite(r0v) || std::fabs(r0v) < 1e-290) break;
      alpha = rho / r0v;
      for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];

      if (sup_norm(s) <= tol) {
        for (std::size_t i = 0; i < n; ++i) u[i] += alpha * phat[i];
        rep.iterations = it + 1;
        break;
      }

      sgs_apply(P, s, tmp, shat);
      P.multiply(shat, t);
      for (std::size_t i = 0; i < n; ++i) t[i] = shat[i] - t[i];

      const double tt = dot(t, t);
      if (!std::isfinite(tt) || tt < 1e-290) break;
      omega = dot(t, s) / tt;
      for (std::size_t i = 0; i < n; ++i) {
        u[i] += alpha * phat[i] + omega * shat[i];
        r[i] = s[i] - omega * t[i];
      }
      rho_prev = rho;
      rep.iterations = it + 1;

      res = sup_norm(r);
      if (!std::isfinite(res)) break;
      if (res <= tol) break;
      if (res < 0.9 * best) {
        best = res;
        stall = 0;
      } else if (++stall > 200) {
        break;  // stagnation -> fall through to sweeps
      }
    }
  }

  // Polish (and fallback): plain symmetric sweeps on the fixed-point form.
  fixed_point_residual(P, g, u, r);
  res = sup_norm(r);
  if (!std::isfinite(res)) {
    std::fill(u.begin(), u.end(), 0.0);  // restart from scratch if Krylov blew up
    fixed_point_residual(P, g, u, r);
    res = sup_norm(r);
  }
  int sweeps = 0;
  while (res > tol && sweeps < opts.max_polish_sweeps) {
    sgs_sweep(P, g, u);
    ++sweeps;
    if (sweeps % 4 == 0 || sweeps >= opts.max_polish_sweeps) {
      fixed_point_residual(P, g, u, r);
      const double nres = sup_norm(r);
      if (nres >= res) break;  // sweeps no longer helping
      res = nres;
    }
  }
  fixed_point_residual(P, g, u, r);
  res = sup_norm(r);

  rep.polish_sweeps = sweeps;
  rep.residual_inf = res;
  rep.converged = res <= tol;
  return rep;
}

}  // namespace vortex
