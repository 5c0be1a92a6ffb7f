#include "binshrink/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace binshrink {

double Vec2::norm() const { return std::hypot(v0, v1); }

EigenSym2 eigen_sym(const Mat2& m) {
  EigenSym2 e;
  if (m.m01 == 0.0) {
    if (m.m00 <= m.m11) {
      e.values = {m.m00, m.m11};
      e.vectors = {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
    } else {
      e.values = {m.m11, m.m00};
      e.vectors = {Vec2{0.0, 1.0}, Vec2{1.0, 0.0}};
    }
    return e;
  }
  const double half_tr = 0.5 * (m.m00 + m.m11);
  const double half_diff = 0.5 * (m.m00 - m.m11);
  const double disc = std::hypot(half_diff, m.m01);
  const double lo = half_tr - disc;
  const double hi = half_tr + disc;
  auto unit_for = [&](double lambda) {
    // Pick the better-conditioned of the two row expressions.
    Vec2 a{m.m01, lambda - m.m00};
    Vec2 b{lambda - m.m11, m.m01};
    Vec2 v = a.norm() >= b.norm() ? a : b;
    const double nv = v.norm();
    return Vec2{v.v0 / nv, v.v1 / nv};
  };
  e.values = {lo, hi};
  e.vectors[0] = unit_for(lo);
  // Orthogonal complement keeps the pair exactly orthonormal.
  e.vectors[1] = Vec2{-e.vectors[0].v1, e.vectors[0].v0};
  return e;
}

Vec2 solve_sym(const Mat2& m, const Vec2& rhs, double cond_limit) {
  const EigenSym2 e = eigen_sym(m);
  const double a0 = std::fabs(e.values[0]);
  const double a1 = std::fabs(e.values[1]);
  const double amax = std::max(a0, a1);
  const double amin = std::min(a0, a1);
  if (amin == 0.0 || amax / amin > cond_limit) {
    const Vec2& d = a0 <= a1 ? e.vectors[0] : e.vectors[1];
    std::ostringstream msg;
    msg << "singular coefficient matrix (condition number "
        << (amin == 0.0 ? std::numeric_limits<double>::infinity() : amax / amin)
        << "), degenerate direction (" << d.v0 << ", " << d.v1 << ")";
    throw NumericError(msg.str());
  }
  Vec2 x{0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    const double coef = e.vectors[i].dot(rhs) / e.values[i];
    x = x + e.vectors[i] * coef;
  }
  return x;
}

Mat2 psd_clip(const Mat2& m, bool* clipped) {
  EigenSym2 e = eigen_sym(m);
  bool any = false;
  Mat2 out{0.0, 0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    double v = e.values[i];
    if (v < 0.0) {
      v = 0.0;
      any = true;
    }
    out.m00 += v * e.vectors[i].v0 * e.vectors[i].v0;
    out.m01 += v * e.vectors[i].v0 * e.vectors[i].v1;
    out.m11 += v * e.vectors[i].v1 * e.vectors[i].v1;
  }
  if (clipped) *clipped = any;
  return out;
}

double min_quadratic_free(const Mat2& m, const Vec2& g, bool* clipped) {
  const Mat2 p = psd_clip(m, clipped);
  const EigenSym2 e = eigen_sym(p);
  const double tol = 1e-12 * std::max(e.values[1], 1e-300);
  double value = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double gi = e.vectors[i].dot(g);
    if (e.values[i] > tol) {
      value -= 0.5 * gi * gi / e.values[i];
    }
    // Null directions are dropped: the infimum along them is unbounded and
    // the caller asked for the guarded finite value.
  }
  return value;
}

namespace {

struct Candidate {
  Vec2 u;
  bool ok = false;
};

double eval_obj(const Mat2& a, const Vec2& g, const Vec2& u) {
  return u.dot(a.mul(u)) + g.dot(u);
}

// Minimum of a11 t^2 + q t + r0 for t in [t_lo, t_hi].
double argmin_1d(double a11, double q, double t_lo, double t_hi) {
  if (t_lo > t_hi) std::swap(t_lo, t_hi);
  if (a11 > 0.0) {
    const double t = -q / (2.0 * a11);
    return std::clamp(t, t_lo, t_hi);
  }
  // Linear (or flat): an endpoint.
  return q > 0.0 ? t_lo : t_hi;
}

// Global minimum of u' a u + g' u on the circle |u| = r (a PSD). Classic
// trust-region boundary solution via the secular equation in the eigenbasis.
Candidate circle_min(const EigenSym2& e, const Vec2& g, double r) {
  Candidate c;
  if (r <= 0.0) {
    c.u = {0.0, 0.0};
    c.ok = (r == 0.0);
    return c;
  }
  const double d0 = e.values[0];
  const double d1 = e.values[1];
  const double g0 = e.vectors[0].dot(g);
  const double g1 = e.vectors[1].dot(g);
  const double scale = std::max({std::fabs(d1), std::fabs(g0) / r, std::fabs(g1) / r, 1e-300});

  auto build = [&](double w0, double w1) {
    return Vec2{e.vectors[0].v0 * w0 + e.vectors[1].v0 * w1,
                e.vectors[0].v1 * w0 + e.vectors[1].v1 * w1};
  };

  // Hard case: no component along the smallest eigen-direction.
  if (std::fabs(g0) <= 1e-14 * scale * r) {
    const double w1 = (d1 - d0) > 1e-14 * scale ? -g1 / (2.0 * (d1 - d0)) : 0.0;
    if (std::fabs(w1) <= r) {
      const double w0 = std::sqrt(std::max(0.0, r * r - w1 * w1));
      // Both signs give the same objective; pick +.
      c.u = build(w0, w1);
      c.ok = true;
      return c;
    }
  }

  // norm2(mu) = sum gi^2 / (2(di + mu))^2 is decreasing on (-d0, inf).
  auto norm2 = [&](double mu) {
    const double w0 = -g0 / (2.0 * (d0 + mu));
    const double w1 = -g1 / (2.0 * (d1 + mu));
    return w0 * w0 + w1 * w1;
  };
  double lo = -d0 + 1e-14 * scale;
  double hi = std::max(lo, -d0) + scale;
  while (norm2(hi) > r * r) hi = -d0 + 2.0 * (hi + d0);
  // lo may already be below the target norm in the near-hard case; widen down.
  int guard = 0;
  while (norm2(lo) < r * r && guard++ < 200) {
    const double step = (lo + d0);
    lo = -d0 + step * 0.5;
    if (step < 1e-300) break;
  }
  if (norm2(lo) < r * r) {
    // Effectively the hard case; fall back to the closest representable point.
    const double w0 = -g0 / (2.0 * (d0 + lo));
    const double w1 = -g1 / (2.0 * (d1 + lo));
    const double n = std::sqrt(w0 * w0 + w1 * w1);
    if (n > 0.0) {
      c.u = build(w0 * r / n, w1 * r / n);
      c.ok = true;
    }
    return c;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm2(mid) > r * r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double mu = 0.5 * (lo + hi);
  c.u = build(-g0 / (2.0 * (d0 + mu)), -g1 / (2.0 * (d1 + mu)));
  c.ok = true;
  return c;
}

}  // namespace

double min_quadratic_slab_disc(const Mat2& a, const Vec2& g, double lo, double hi,
                               double radius) {
  if (!(lo <= hi) || radius < 0.0)
    throw NumericError("min_quadratic_slab_disc: empty constraint box");
  const EigenSym2 e = eigen_sym(a);
  const double tol = 1e-13 * std::max({std::fabs(e.values[1]), g.norm(), 1.0});

  std::vector<Vec2> candidates;
  auto add_if_feasible = [&](const Vec2& u) {
    const double slack = 1e-9 * std::max(1.0, radius);
    if (u.v0 >= lo - slack && u.v0 <= hi + slack && u.norm() <= radius + slack) {
      Vec2 v = u;
      v.v0 = std::clamp(v.v0, lo, hi);
      const double n = v.norm();
      if (n > radius && n > 0.0) v = v * (radius / n);
      if (v.v0 >= lo && v.v0 <= hi) candidates.push_back(v);
    }
  };

  // Interior stationary point (pseudo-solve along non-null eigen-directions).
  {
    bool finite = true;
    Vec2 u{0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
      const double gi = e.vectors[i].dot(g);
      if (e.values[i] > tol) {
        u = u + e.vectors[i] * (-gi / (2.0 * e.values[i]));
      } else if (std::fabs(gi) > tol) {
        finite = false;  // descent direction escapes; boundary cases cover it
      }
    }
    if (finite) add_if_feasible(u);
  }

  // Slab edges u0 = lo and u0 = hi inside the disc.
  for (double edge : {lo, hi}) {
    if (std::fabs(edge) > radius) continue;
    const double reach = std::sqrt(std::max(0.0, radius * radius - edge * edge));
    const double q = 2.0 * a.m01 * edge + g.v1;
    const double t = argmin_1d(a.m11, q, -reach, reach);
    add_if_feasible({edge, t});
  }

  // Disc boundary.
  {
    Candidate c = circle_min(e, g, radius);
    if (c.ok) add_if_feasible(c.u);
  }

  // Corners (slab edge meets the disc).
  for (double edge : {lo, hi}) {
    if (std::fabs(edge) > radius) continue;
    const double reach = std::sqrt(std::max(0.0, radius * radius - edge * edge));
    add_if_feasible({edge, reach});
    add_if_feasible({edge, -reach});
  }

  // Origin, feasible whenever the slab straddles zero.
  if (lo <= 0.0 && hi >= 0.0) candidates.push_back({0.0, 0.0});

  if (candidates.empty())
    throw NumericError("min_quadratic_slab_disc: no feasible candidate point");
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& u : candidates) best = std::min(best, eval_obj(a, g, u));
  return best;
}

}  // namespace binshrink
