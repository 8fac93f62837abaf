#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dislat {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kSqrt3 = 1.7320508075688772;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integer vector in the triangular lattice basis {e1, nu}, with
// e1 = (1,0) and nu = (1/2, sqrt(3)/2).  The third lattice direction is
// eta = nu - e1 = (-1/2, sqrt(3)/2), i.e. coordinates (-1, 1).
struct LatticeVector {
  std::int64_t p = 0;
  std::int64_t q = 0;

  friend LatticeVector operator+(LatticeVector a, LatticeVector b) { return {a.p + b.p, a.q + b.q}; }
  friend LatticeVector operator-(LatticeVector a, LatticeVector b) { return {a.p - b.p, a.q - b.q}; }
  LatticeVector operator-() const { return {-p, -q}; }
  friend LatticeVector operator*(std::int64_t k, LatticeVector v) { return {k * v.p, k * v.q}; }
  friend bool operator==(LatticeVector a, LatticeVector b) { return a.p == b.p && a.q == b.q; }
  friend bool operator!=(LatticeVector a, LatticeVector b) { return !(a == b); }

  bool is_zero() const { return p == 0 && q == 0; }

  // Squared Euclidean length of the embedded vector; exact integer.
  std::int64_t norm_sq() const { return p * p + p * q + q * q; }

  Vec2 embed() const { return Vec2(double(p) + 0.5 * double(q), 0.5 * kSqrt3 * double(q)); }
};

inline LatticeVector lattice_e1() { return {1, 0}; }
inline LatticeVector lattice_nu() { return {0, 1}; }
inline LatticeVector lattice_eta() { return {-1, 1}; }

// Embedded wedge product equals (sqrt(3)/2) * wedge_z.
inline std::int64_t wedge_z(LatticeVector a, LatticeVector b) { return a.p * b.q - a.q * b.p; }

// Twice the embedded dot product; exact integer.
inline std::int64_t dot2(LatticeVector a, LatticeVector b) {
  return 2 * a.p * b.p + 2 * a.q * b.q + a.p * b.q + a.q * b.p;
}

inline double wedge(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Convex polygon with counterclockwise vertices.  Domains are always convex,
// so point membership and boundary distance reduce to per-edge tests.
struct ConvexPolygon {
  std::vector<Vec2> vertices;

  static ConvexPolygon square(double half_width);

  // Throws Error unless the vertex list is a counterclockwise convex polygon
  // with nonempty interior.
  void validate() const;

  // Strict interior test.
  bool contains_interior(const Vec2& x) const;

  // Closed-hull membership (boundary included).
  bool contains_closed(const Vec2& x) const;

  // Euclidean distance to the boundary; meaningful for interior points.
  double boundary_distance(const Vec2& x) const;

  double diameter() const;
};

}  // namespace dislat
