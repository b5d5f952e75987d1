#ifndef VORTEX_MAT2_HPP
#define VORTEX_MAT2_HPP

#include <cmath>

#include "vortex/errors.hpp"

namespace vortex {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  double sup_norm() const { return std::max(std::fabs(x), std::fabs(y)); }
};

// Dense 2x2 matrix with the row-sup norm ||M|| = max_i (|M_i1| + |M_i2|)
// used throughout the recurrence solver and its diagnostics.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Mat2 operator+(const Mat2& o) const {
    return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
  }
  Mat2 operator-(const Mat2& o) const {
    return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
  }
  Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
  Mat2 operator-() const { return {-a11, -a12, -a21, -a22}; }

  Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
  Vec2 operator*(const Vec2& v) const {
    return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
  }

  double det() const { return a11 * a22 - a12 * a21; }
  double row_sup_norm() const {
    return std::max(std::fabs(a11) + std::fabs(a12), std::fabs(a21) + std::fabs(a22));
  }

  // Adjugate-formula inverse with an explicit determinant-magnitude guard.
  Mat2 inverse() const {
    const double dt = det();
    if (std::fabs(dt) < 1e-300 || !std::isfinite(dt)) {
      throw NumericalFailure("2x2 inverse: determinant magnitude below guard");
    }
    const double s = 1.0 / dt;
    return {a22 * s, -a12 * s, -a21 * s, a11 * s};
  }

  double condition_estimate() const { return row_sup_norm() * inverse().row_sup_norm(); }
};

}  // namespace vortex

#endif
