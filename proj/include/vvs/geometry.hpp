#pragma once

#include <cmath>

namespace vvs {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Affine reference-to-physical map F(xhat) = origin + J * xhat with
/// reference cell (-1,1)^2.
struct AffineMap {
  double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
  Vec2 origin;

  double det() const { return j00 * j11 - j01 * j10; }

  Vec2 apply(Vec2 xhat) const {
    return {origin.x + j00 * xhat.x + j01 * xhat.y,
            origin.y + j10 * xhat.x + j11 * xhat.y};
  }

  Vec2 apply_inverse(Vec2 x) const {
    const double d = det();
    const double rx = x.x - origin.x, ry = x.y - origin.y;
    return {(j11 * rx - j01 * ry) / d, (-j10 * rx + j00 * ry) / d};
  }

  // grad_x phi = J^{-T} grad_xhat phi
  Vec2 map_gradient(Vec2 ghat) const {
    const double d = det();
    return {(j11 * ghat.x - j10 * ghat.y) / d,
            (-j01 * ghat.x + j00 * ghat.y) / d};
  }
};

struct Rect {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  bool contains(Vec2 p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
};

}  // namespace vvs
