#ifndef VORTEX_RECURRENCE_HPP
#define VORTEX_RECURRENCE_HPP

#include <iosfwd>
#include <vector>

#include "vortex/dirichlet.hpp"
#include "vortex/mat2.hpp"
#include "vortex/model.hpp"

namespace vortex {

// ---------------------------------------------------------------------------
// The fixation probability of allele a expands to first order in the two
// death-rate increments as
//
//   u = p - delta * v - delta_prime * v_prime,
//
// where p is the neutral allele share and v, v_prime are the unique sublinear
// solutions of discrete Dirichlet problems. Both reduce to size-indexed pair
// sequences: v is built from (x_N, y_N) and v_prime from those plus
// (x'_N, y'_N). Each pair sequence solves a two-level 2x2 matrix recurrence
//
//   B_N z_{N+1} = C_N z_N + D_N z_{N-1} + f_N,
//
// whose unique bounded solution is computed here by a forward elimination
// (one-level reduction with matrices K_N) followed by a backward tail sum,
// the matrix analogue of backward recursion for minimal solutions of
// three-term recurrences.
// ---------------------------------------------------------------------------

struct LayerMatrices {
  Mat2 B, C, D;
  Vec2 f;
};

// Coefficients of the (x_N, y_N) recurrence, valid for N >= 3.
LayerMatrices first_layer(int N, const DemographicParams& p);

// Modified N = 3 coefficient: the bottom equation folds the determined N = 2
// combination x_2 + (3/2) y_2 = (4/3) x_3 + 2 y_3 into C_3.
Mat2 first_layer_c3_tilde(const DemographicParams& p);
Vec2 first_layer_f3_tilde(int unused_n, const DemographicParams& p);

// Coefficients of the (x'_N, y'_N) recurrence, valid for N >= 3. The source
// term consumes y_{N-1}, y_N, y_{N+1} from the first layer.
LayerMatrices second_layer(int N, const DemographicParams& p, double y_minus, double y_mid,
                           double y_plus);

// Bottom (N = 2) equation of the primed layer: Bt2' z'_3 = Ct2' z'_2 + ft2'.
Mat2 second_layer_b2_tilde();
Mat2 second_layer_c2_tilde();
Vec2 second_layer_f2_tilde(double x2, double y2, double x3, double y3);

// Per-size solver health data, in the row-sup norm. F_N = C_N + K_N is the
// forward-elimination pivot; G_N = V_N + K_N / b is its scale-free core
// (bounded by 9 in the small-fecundity regime b <= c/24, which also forces
// ||K_N|| < c/2 and ||M_N^{-1}|| <= 2b/(cN) for large N).
struct SolverDiagnostics {
  struct Row {
    int N = 0;
    double norm_K = 0.0;
    double norm_G = 0.0;
    double cond_F = 0.0;
    double norm_Minv_scaled = 0.0;  // ||M_N^{-1}|| * cN / (2b)
  };
  std::vector<Row> rows;
  int tail_depth = 0;               // L actually used by the backward sum
  double tail_residual = 0.0;       // change in the tables at the last depth increase
  double max_residual_first = 0.0;  // recurrence residual, first layer
  double max_residual_second = 0.0; // recurrence residual, primed layer
  double h3_split_diff = 0.0;       // invariance of the reduced bottom source
  double vprime_n2_split_diff = 0.0;
};

enum class TableMethod {
  Recurrence,          // forward elimination + backward tail sum
  DirichletInversion,  // extraction from finite-difference Dirichlet solves
};

// The sequences x_N, y_N (N >= 3), x'_N, y'_N (N >= 2), and the single
// determined N = 2 combination s2 = x_2 + (3/2) y_2. For the primed layer the
// undetermined split is fixed to (x_2, y_2) = (s2, 0); all reported values
// are invariant under that choice (checked numerically, see diagnostics).
struct PerturbationTables {
  DemographicParams params;
  int n_max = 0;
  double s2 = 0.0;
  std::vector<double> x, y;    // index i holds N = 3 + i
  std::vector<double> xp, yp;  // index i holds N = 2 + i
  TableMethod method = TableMethod::Recurrence;
  double achieved_tol = 0.0;
  SolverDiagnostics diagnostics;

  double x_at(long long N) const;
  double y_at(long long N) const;
  double xp_at(long long N) const;
  double yp_at(long long N) const;
  double x2_split() const { return s2; }
  double y2_split() const { return 0.0; }
};

struct RecurrenceOptions {
  double tol = 1e-10;   // recurrence residual target
  int l_max = -1;       // backward-tail depth cap; -1 selects 10*n_max + 1000
  bool allow_fallback = true;  // extract from the Dirichlet oracle when the
                               // tail method cannot reach tol (large b/c)
  double fd_step = 1e-3;       // finite-difference step for the fallback
  int fallback_lattice_margin = 40;
};

// First layer alone: x_N, y_N for N = 3..n_max plus s2.
struct ZTables {
  int n_max = 0;
  double s2 = 0.0;
  std::vector<double> x, y;  // N = 3 + i
  // forward-pass state kept for the primed layer and diagnostics
  std::vector<Mat2> m_inv;   // M_N^{-1}, N = 3 + i, up to the tail depth
  std::vector<Mat2> k;       // K_N
  std::vector<Vec2> g;       // g_N
  std::vector<double> y_deep;  // y_N up to the tail depth (sources for layer 2)
  int tail_depth = 0;
  double tail_residual = 0.0;
};

ZTables solve_z(const DemographicParams& params, int n_max, double tol, int l_max);

struct ZPrimeTables {
  int n_max = 0;
  std::vector<double> xp, yp;  // N = 2 + i
  double h3_split_diff = 0.0;
  double vprime_n2_split_diff = 0.0;
  int tail_depth = 0;
  double tail_residual = 0.0;
};

ZPrimeTables solve_z_prime(const DemographicParams& params, double tol, const ZTables& z,
                           int l_max);

// Full pipeline: both layers plus diagnostics, falling back to the Dirichlet
// extraction when requested and needed.
PerturbationTables solve_tables(const DemographicParams& params, int n_max,
                                const RecurrenceOptions& opts = {});

// Closed forms evaluated from the tables.
// v(k,m,n) = (k-n) [ (m/N) x_N + ((N^2-(k-n)^2)/N^2) y_N ]   for N >= 3,
// v(1,1,0) = s2/2 = -v(0,1,1), v = 0 on the other N = 2 states.
double v_value(const PopulationState& s, const PerturbationTables& t);

// v'(k,m,n) = (nY/N) x_N + m x'_N + Y(2N-Y) ( y'_N/N - Y/(2N^2) y_N ),
// with Y = 2k + m; valid from N = 2 using the stored split.
double v_prime_value(const PopulationState& s, const PerturbationTables& t);

struct FirstOrderFixation {
  double raw = 0.0;      // p - delta*v - delta_prime*v_prime as computed
  double clamped = 0.0;  // raw clipped to [0,1] for reporting
};

FirstOrderFixation fixation_first_order(const PopulationState& s, const DemographicParams& params,
                                        const PerturbationTables& t);

const SolverDiagnostics& diagnostics(const PerturbationTables& t);

// CSV dumps: tables as N,x,y,xp,yp and diagnostics as N,normK,normG,condF.
void write_tables_csv(std::ostream& os, const PerturbationTables& t);
void write_diagnostics_csv(std::ostream& os, const PerturbationTables& t);

}  // namespace vortex

#endif
