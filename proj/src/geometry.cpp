#include "dislat/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace dislat {

ConvexPolygon ConvexPolygon::square(double half_width) {
  if (!(half_width > 0.0)) throw Error("square domain needs positive half_width");
  ConvexPolygon poly;
  poly.vertices = {Vec2(-half_width, -half_width), Vec2(half_width, -half_width),
                   Vec2(half_width, half_width), Vec2(-half_width, half_width)};
  return poly;
}

void ConvexPolygon::validate() const {
  if (vertices.size() < 3) throw Error("polygon needs at least 3 vertices");
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    const Vec2& c = vertices[(i + 2) % n];
    double cr = wedge(b - a, c - b);
    if (!(cr > 0.0)) throw Error("polygon vertices must be strictly convex and counterclockwise");
  }
}

bool ConvexPolygon::contains_interior(const Vec2& x) const {
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    if (!(wedge(b - a, x - a) > 0.0)) return false;
  }
  return true;
}

bool ConvexPolygon::contains_closed(const Vec2& x) const {
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    if (wedge(b - a, x - a) < 0.0) return false;
  }
  return true;
}

double ConvexPolygon::boundary_distance(const Vec2& x) const {
  const std::size_t n = vertices.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    Vec2 e = b - a;
    double len2 = e.squaredNorm();
    double t = len2 > 0.0 ? std::clamp((x - a).dot(e) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (x - (a + t * e)).norm());
  }
  return best;
}

double ConvexPolygon::diameter() const {
  double best = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      best = std::max(best, (vertices[i] - vertices[j]).norm());
  return best;
}

}  // namespace dislat
