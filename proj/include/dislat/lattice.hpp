#pragma once

#include "dislat/geometry.hpp"

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace dislat {

// Lattice node at position eps * (a e1 + b nu).
struct NodeId {
  std::int32_t a = 0;
  std::int32_t b = 0;
  friend bool operator==(NodeId x, NodeId y) { return x.a == y.a && x.b == y.b; }
  friend bool operator<(NodeId x, NodeId y) { return x.a != y.a ? x.a < y.a : x.b < y.b; }
};

enum class Orientation : std::uint8_t { Up, Down };

// Up(a,b) has counterclockwise vertices (a,b), (a+1,b), (a,b+1).
// Down(a,b) has counterclockwise vertices (a,b), (a+1,b-1), (a+1,b).
struct TriangleId {
  std::int32_t a = 0;
  std::int32_t b = 0;
  Orientation orient = Orientation::Up;
  friend bool operator==(TriangleId x, TriangleId y) {
    return x.a == y.a && x.b == y.b && x.orient == y.orient;
  }
  friend bool operator<(TriangleId x, TriangleId y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return int(x.orient) < int(y.orient);
  }
};

// Neighbor step order: +e1, +nu, +eta, -e1, -nu, -eta.
inline constexpr std::array<std::array<std::int32_t, 2>, 6> kNeighborSteps{
    {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};

// Unordered nearest-neighbor bond; i < j never assumed, but the stored
// orientation i -> j always follows one of the three positive steps
// (+e1, +nu, +eta), recorded in `dir`.
struct Bond {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::uint8_t dir = 0;  // 0..2
  bool dangling = false; // edge of no triangle in the complex
};

class LatticeComplex {
 public:
  double epsilon = 1.0;
  ConvexPolygon domain;

  std::vector<NodeId> nodes;          // sorted lexicographically
  std::vector<TriangleId> triangles;  // sorted
  std::vector<Bond> bonds;

  // Per-node neighbor node index along each of the 6 steps, -1 if absent.
  std::vector<std::array<std::int32_t, 6>> neighbor;
  // Per-node bond index along each of the 6 steps, -1 if absent.
  std::vector<std::array<std::int32_t, 6>> neighbor_bond;
  // Counterclockwise vertex node indices per triangle.
  std::vector<std::array<std::uint32_t, 3>> tri_nodes;
  // True when all 6 triangles around the node are in the complex.
  std::vector<bool> node_interior;

  bool edge_connected = false;
  bool simply_connected = false;
  std::size_t dangling_bond_count = 0;

  std::int32_t node_index(NodeId n) const;
  std::int32_t triangle_index(TriangleId t) const;

  Vec2 node_position(std::uint32_t idx) const {
    const NodeId& n = nodes[idx];
    return epsilon * Vec2(double(n.a) + 0.5 * double(n.b), 0.5 * kSqrt3 * double(n.b));
  }

  static std::array<NodeId, 3> triangle_vertices(TriangleId t) {
    if (t.orient == Orientation::Up)
      return {NodeId{t.a, t.b}, NodeId{t.a + 1, t.b}, NodeId{t.a, t.b + 1}};
    return {NodeId{t.a, t.b}, NodeId{t.a + 1, t.b - 1}, NodeId{t.a + 1, t.b}};
  }

  static Vec2 barycenter(TriangleId t, double eps);

  Vec2 barycenter(std::uint32_t tri_idx) const { return barycenter(triangles[tri_idx], epsilon); }

  // Lattice step from node i to node j (must be nearest neighbors).
  LatticeVector bond_step(std::uint32_t i, std::uint32_t j) const {
    return {nodes[j].a - nodes[i].a, nodes[j].b - nodes[i].b};
  }

  // The one or two triangles of the complex having this bond as an edge.
  std::vector<std::int32_t> incident_triangles(const Bond& bond) const;

  // The <= 6 triangles of the complex containing the node as a vertex.
  std::vector<std::int32_t> triangles_at_node(std::uint32_t node_idx) const;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

 private:
  friend LatticeComplex build_lattice(const ConvexPolygon& domain, double epsilon);
  std::unordered_map<std::uint64_t, std::int32_t> node_lookup_;
  std::unordered_map<std::uint64_t, std::int32_t> tri_lookup_;
};

// Builds the triangular lattice complex of all scaled lattice triangles whose
// closed hull lies inside the convex domain.  Throws Error when no triangle
// fits or the preconditions fail.
LatticeComplex build_lattice(const ConvexPolygon& domain, double epsilon);

}  // namespace dislat
