#pragma once

#include <array>
#include <string>

#include "binshrink/types.hpp"

namespace binshrink {

struct Vec2 {
  double v0 = 0.0;
  double v1 = 0.0;

  double dot(const Vec2& o) const { return v0 * o.v0 + v1 * o.v1; }
  double norm() const;
  Vec2 operator+(const Vec2& o) const { return {v0 + o.v0, v1 + o.v1}; }
  Vec2 operator-(const Vec2& o) const { return {v0 - o.v0, v1 - o.v1}; }
  Vec2 operator*(double s) const { return {v0 * s, v1 * s}; }
};

// Symmetric 2x2 matrix.
struct Mat2 {
  double m00 = 0.0;
  double m01 = 0.0;
  double m11 = 0.0;

  double trace() const { return m00 + m11; }
  double det() const { return m00 * m11 - m01 * m01; }
  Vec2 mul(const Vec2& x) const { return {m00 * x.v0 + m01 * x.v1, m01 * x.v0 + m11 * x.v1}; }
  Mat2 operator+(const Mat2& o) const { return {m00 + o.m00, m01 + o.m01, m11 + o.m11}; }
  Mat2 operator-(const Mat2& o) const { return {m00 - o.m00, m01 - o.m01, m11 - o.m11}; }
  Mat2 operator*(double s) const { return {m00 * s, m01 * s, m11 * s}; }
};

struct EigenSym2 {
  // Ascending eigenvalues with orthonormal eigenvectors (columns).
  std::array<double, 2> values;
  std::array<Vec2, 2> vectors;
};

EigenSym2 eigen_sym(const Mat2& m);

// Solves m x = rhs. Throws NumericError when the condition number exceeds
// `cond_limit`; the message names the most degenerate eigen-direction.
Vec2 solve_sym(const Mat2& m, const Vec2& rhs, double cond_limit = 1e12);

// Eigenvalue clipping at zero. Sets *clipped when a negative eigenvalue was
// removed.
Mat2 psd_clip(const Mat2& m, bool* clipped = nullptr);

// SURE or risk surface as an explicit function of the shrinkage parameter:
// eval(l) = l' a l + b' l + c.
struct QuadraticForm {
  Mat2 a;
  Vec2 b;
  double c = 0.0;

  double eval(const Lambda& l) const {
    const Vec2 v{l.lambda1, l.lambda2};
    return v.dot(a.mul(v)) + b.dot(v) + c;
  }
};

// Minimum of 0.5 u' m u + g' u over all of R^2. m is PSD-clipped first;
// components of g along (near-)null eigen-directions are dropped so the value
// stays finite. Minimum is always <= 0.
double min_quadratic_free(const Mat2& m, const Vec2& g, bool* clipped = nullptr);

// Minimum of u' a u + g' u over the intersection of the slab u0 in [lo, hi]
// and the disc |u| <= radius. `a` must be PSD (within roundoff). Assumes the
// feasible set is nonempty (it always contains a point of the segment
// u1 = 0, u0 in [max(lo,-radius), min(hi,radius)] in this library's usage).
double min_quadratic_slab_disc(const Mat2& a, const Vec2& g, double lo, double hi,
                               double radius);

}  // namespace binshrink
