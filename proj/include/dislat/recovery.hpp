#pragma once

#include "dislat/continuum.hpp"
#include "dislat/fields.hpp"

#include <vector>

namespace dislat {

// A dislocation to place: lattice Burgers vector at a continuum position.
struct Dislocation {
  BurgersVector b;
  Vec2 x = Vec2::Zero();
};

// Half-line from a triangle barycenter along one of the lattice axes
// (0 = e1, 1 = nu, 2 = eta).  All crossing predicates are evaluated in
// tripled lattice coordinates, where barycenters are integer points.
struct HalfLine {
  TriangleId origin_tri;
  int axis = 0;

  Vec2 origin(double epsilon) const { return LatticeComplex::barycenter(origin_tri, epsilon); }
  double cut_angle() const { return axis * (3.14159265358979323846 / 3.0); }
};

// Oriented bond crossing a half-line; `closer` is the endpoint nearer to it.
// `closer_ccw` records whether the closer endpoint lies on the
// counterclockwise side of the oriented cut (positive wedge with the cut
// direction): the slip sign rides on the side, not on the distance, so that
// every axis produces the same tip charge.
struct CrossingBond {
  std::uint32_t closer = 0;
  std::uint32_t farther = 0;
  bool closer_ccw = false;
};

// Up-triangle whose barycenter is nearest to x; ties broken lexicographically
// by (a, b).
TriangleId snap_to_barycenter(const Vec2& x, const LatticeComplex& cx);

// All bonds whose closed segment meets the half-line, oriented with the
// strictly closer endpoint first.  Exact integer predicates; throws if a bond
// cannot be oriented (equidistant endpoints), which barycenter-origin
// half-lines never produce.
std::vector<CrossingBond> crossing_bonds(const HalfLine& line, const LatticeComplex& cx);

// True when the half-line meets the closed triangle.
bool halfline_meets_triangle(const HalfLine& line, TriangleId tri);

struct RecoveryPair {
  DisplacementField u;
  SlipField sigma;
  DislocationMeasure mu;  // equals sum_k eps b_k delta at the snapped triangles
  std::vector<TriangleId> snapped;
  std::vector<HalfLine> cuts;
};

// Scaling-law recovery construction for unit Burgers vectors: slip
// concentrated on the bonds crossing one half-line per dislocation, and the
// lattice restriction of the singular continuum displacement with matching
// branch cuts.  Throws when a Burgers vector is not a unit lattice vector,
// when the snapped triangles violate mild separation (use a smaller epsilon),
// or when a half-line meets another dislocation's triangle.
RecoveryPair build_recovery_pair(const LatticeComplex& cx,
                                 const std::vector<Dislocation>& dislocations);

// Slip with prescribed dislocation measure, nonzero only on bonds crossing
// one half-line per atom: axis of b for b in {+-e1, +-nu, +-eta}, axis e1
// otherwise.  Requires mild separation; throws when a half-line passes
// through another charged triangle.
SlipField representative_slip(const DislocationMeasure& mu, const LatticeComplex& cx);

}  // namespace dislat
