#include "dislat/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dislat {

namespace {

// Integer point in tripled lattice coordinates.
struct TriPoint {
  std::int64_t p = 0;
  std::int64_t q = 0;
  friend TriPoint operator-(TriPoint a, TriPoint b) { return {a.p - b.p, a.q - b.q}; }
};

TriPoint tripled_node(NodeId n) { return {3 * std::int64_t(n.a), 3 * std::int64_t(n.b)}; }

TriPoint tripled_barycenter(TriangleId t) {
  if (t.orient == Orientation::Up) return {3 * std::int64_t(t.a) + 1, 3 * std::int64_t(t.b) + 1};
  return {3 * std::int64_t(t.a) + 2, 3 * std::int64_t(t.b) - 1};
}

std::int64_t ecross(TriPoint a, TriPoint b) { return a.p * b.q - a.q * b.p; }
std::int64_t edot2(TriPoint a, TriPoint b) {
  return 2 * a.p * b.p + 2 * a.q * b.q + a.p * b.q + a.q * b.p;
}

TriPoint axis_step(int axis) {
  switch (axis) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    default: return {-1, 1};
  }
}

// Compares squared distances of two points to the half-line (tip at origin of
// the relative coordinates, direction D).  Both cases (perpendicular foot on
// the ray, or nearest point at the tip) share the common scale factor
// edot2(D,D), so a single integer comparison decides.
int dist_compare(TriPoint vi, TriPoint vj, TriPoint D) {
  const std::int64_t dd = edot2(D, D);
  auto scaled_d2 = [&](TriPoint v) {
    std::int64_t t = edot2(v, D);
    std::int64_t full = edot2(v, v) * dd;
    return t >= 0 ? full - t * t : full;
  };
  std::int64_t ni = scaled_d2(vi), nj = scaled_d2(vj);
  return ni < nj ? -1 : (ni > nj ? 1 : 0);
}

// Does the closed segment [A, B] meet the half-line {tip + s D, s >= 0}?
// Returns 0 = no, 1 = transversal crossing, 2 = degenerate contact.
int segment_ray_status(TriPoint A, TriPoint B, TriPoint tip, TriPoint D) {
  TriPoint va = A - tip, vb = B - tip;
  std::int64_t sa = ecross(D, va), sb = ecross(D, vb);
  if (sa == 0 && sb == 0) {  // collinear with the supporting line
    return (edot2(va, D) >= 0 || edot2(vb, D) >= 0) ? 2 : 0;
  }
  if (sa == 0 || sb == 0) {  // an endpoint on the supporting line
    TriPoint v = sa == 0 ? va : vb;
    return edot2(v, D) >= 0 ? 2 : 0;
  }
  if ((sa > 0) == (sb > 0)) return 0;
  if (sa < 0) {
    std::swap(va, vb);
    std::swap(sa, sb);
  }
  // On-ray parameter of the line intersection, cleared of denominators.
  std::int64_t on_ray = sa * edot2(vb, D) - sb * edot2(va, D);
  if (on_ray > 0) return 1;
  if (on_ray == 0) return 2;  // passes exactly through the tip
  return 0;
}

int axis_for(BurgersVector b) {
  if (b.norm_sq() == 1) {
    if (b.q == 0) return 0;   // +-e1
    if (b.p == 0) return 1;   // +-nu
    return 2;                 // +-eta
  }
  return 0;  // canonical axis for composite vectors
}

void check_halfline_avoids(const HalfLine& line, const DislocationMeasure& mu,
                           TriangleId own) {
  for (const auto& [tid, w] : mu.atoms) {
    if (tid == own) continue;
    if (halfline_meets_triangle(line, tid))
      throw Error("half-line passes through another charged triangle");
  }
}

}  // namespace

TriangleId snap_to_barycenter(const Vec2& x, const LatticeComplex& cx) {
  if (cx.triangles.empty()) throw Error("snap_to_barycenter: empty complex");
  bool found = false;
  TriangleId best{};
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const TriangleId& t : cx.triangles) {
    if (t.orient != Orientation::Up) continue;
    double d2 = (LatticeComplex::barycenter(t, cx.epsilon) - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = t;
      found = true;
    }
  }
  if (!found) throw Error("snap_to_barycenter: complex has no Up triangle");
  // Geometric ties land within float noise of each other; resolve them
  // lexicographically by (a, b).  The sorted scan sees candidates in order.
  const double tol = 16.0 * std::numeric_limits<double>::epsilon() *
                     (best_d2 + cx.epsilon * cx.epsilon);
  for (const TriangleId& t : cx.triangles) {
    if (t.orient != Orientation::Up) continue;
    double d2 = (LatticeComplex::barycenter(t, cx.epsilon) - x).squaredNorm();
    if (d2 <= best_d2 + tol) return t;
  }
  return best;
}

bool halfline_meets_triangle(const HalfLine& line, TriangleId tri) {
  const TriPoint tip = tripled_barycenter(line.origin_tri);
  const TriPoint D = axis_step(line.axis);
  auto vs = LatticeComplex::triangle_vertices(tri);
  TriPoint tv[3] = {tripled_node(vs[0]), tripled_node(vs[1]), tripled_node(vs[2])};
  // Tip inside the closed triangle (vertices are counterclockwise).
  bool inside = true;
  for (int k = 0; k < 3; ++k)
    if (ecross(tv[(k + 1) % 3] - tv[k], tip - tv[k]) < 0) inside = false;
  if (inside) return true;
  for (int k = 0; k < 3; ++k)
    if (segment_ray_status(tv[k], tv[(k + 1) % 3], tip, D) != 0) return true;
  return false;
}

std::vector<CrossingBond> crossing_bonds(const HalfLine& line, const LatticeComplex& cx) {
  const TriPoint tip = tripled_barycenter(line.origin_tri);
  const TriPoint D = axis_step(line.axis);
  std::vector<CrossingBond> out;
  for (const Bond& b : cx.bonds) {
    TriPoint I = tripled_node(cx.nodes[b.i]);
    TriPoint J = tripled_node(cx.nodes[b.j]);
    int status = segment_ray_status(I, J, tip, D);
    if (status == 0) continue;
    if (status == 2)
      throw Error("crossing_bonds: bond in degenerate contact with the half-line");
    int cmp = dist_compare(I - tip, J - tip, D);
    if (cmp == 0) throw Error("crossing_bonds: cannot orient equidistant bond");
    CrossingBond cb;
    cb.closer = cmp < 0 ? b.i : b.j;
    cb.farther = cmp < 0 ? b.j : b.i;
    cb.closer_ccw = ecross(D, (cmp < 0 ? I : J) - tip) > 0;
    out.push_back(cb);
  }
  return out;
}

// Slip of one cut: -b on bonds oriented from the clockwise to the
// counterclockwise side of gamma.  Matching the displacement branch
// [cut_angle, cut_angle + 2 pi), this makes du - sigma smooth across the cut
// and charges the tip triangle with exactly +b.
static void add_cut_slip(SlipField& sigma, const std::vector<CrossingBond>& crossings,
                         BurgersVector b) {
  for (const CrossingBond& cb : crossings) {
    if (cb.closer_ccw)
      sigma.add(cb.farther, cb.closer, -b);
    else
      sigma.add(cb.closer, cb.farther, -b);
  }
}

RecoveryPair build_recovery_pair(const LatticeComplex& cx,
                                 const std::vector<Dislocation>& dislocations) {
  RecoveryPair pair;
  pair.u = DisplacementField(cx.node_count());
  pair.mu.epsilon_scaled = true;
  if (dislocations.empty()) return pair;

  DislocationMeasure expected;
  for (const Dislocation& d : dislocations) {
    if (d.b.norm_sq() != 1)
      throw Error("build_recovery_pair accepts unit Burgers vectors only");
    TriangleId t = snap_to_barycenter(d.x, cx);
    pair.snapped.push_back(t);
    expected.add(t, d.b);
  }
  if (expected.atoms.size() != dislocations.size())
    throw Error("two dislocations snapped to the same triangle; use a smaller epsilon");
  if (!check_mild_separation(expected, cx))
    throw Error("snapped dislocations violate mild separation; use a smaller epsilon");

  for (std::size_t k = 0; k < dislocations.size(); ++k) {
    HalfLine cut{pair.snapped[k], axis_for(dislocations[k].b)};
    check_halfline_avoids(cut, expected, pair.snapped[k]);
    pair.cuts.push_back(cut);
  }

  for (std::size_t k = 0; k < dislocations.size(); ++k)
    add_cut_slip(pair.sigma, crossing_bonds(pair.cuts[k], cx), dislocations[k].b);
  pair.mu = dislocation_measure(cx, pair.sigma);
  if (!(pair.mu == expected))
    throw Error("recovery slip does not reproduce the snapped dislocation measure");

  for (std::size_t k = 0; k < dislocations.size(); ++k) {
    const Vec2 center = pair.cuts[k].origin(cx.epsilon);
    const double angle = pair.cuts[k].cut_angle();
    const BurgersVector b = dislocations[k].b;
    Vec2 anchor = cx.epsilon *
                  displacement_singular(b, cx.node_position(0) - center, angle);
    for (std::uint32_t i = 0; i < cx.node_count(); ++i) {
      Vec2 ui = cx.epsilon * displacement_singular(b, cx.node_position(i) - center, angle);
      pair.u[i] += ui - anchor;
    }
  }
  return pair;
}

SlipField representative_slip(const DislocationMeasure& mu, const LatticeComplex& cx) {
  SlipField sigma;
  if (mu.empty()) return sigma;
  if (!mu.epsilon_scaled) throw Error("representative_slip expects an epsilon-scaled measure");
  if (!check_mild_separation(mu, cx))
    throw Error("representative_slip requires mild separation");

  for (const auto& [tid, w] : mu.atoms) {
    HalfLine cut{tid, axis_for(w)};
    check_halfline_avoids(cut, mu, tid);
    add_cut_slip(sigma, crossing_bonds(cut, cx), w);
  }
  DislocationMeasure audit = dislocation_measure(cx, sigma);
  if (!(audit == mu)) throw Error("representative slip failed the circulation audit");
  return sigma;
}

}  // namespace dislat
