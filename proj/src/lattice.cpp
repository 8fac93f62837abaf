#include "dislat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dislat {

namespace {

std::uint64_t pack(std::int32_t a, std::int32_t b) {
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint64_t(std::uint32_t(b));
}

std::uint64_t pack_tri(TriangleId t) {
  // Orientation folded into the low bit of a shifted key.
  return (pack(t.a, t.b) << 1) | std::uint64_t(t.orient == Orientation::Down);
}

struct DisjointSet {
  std::vector<std::int32_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::int32_t find(std::int32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::int32_t x, std::int32_t y) { parent[find(x)] = find(y); }
};

}  // namespace

Vec2 LatticeComplex::barycenter(TriangleId t, double eps) {
  // Mean of the three vertices, in lattice coordinates first: Up barycenter is
  // (a + 1/3, b + 1/3), Down barycenter is (a + 2/3, b - 1/3).
  double la, lb;
  if (t.orient == Orientation::Up) {
    la = double(t.a) + 1.0 / 3.0;
    lb = double(t.b) + 1.0 / 3.0;
  } else {
    la = double(t.a) + 2.0 / 3.0;
    lb = double(t.b) - 1.0 / 3.0;
  }
  return eps * Vec2(la + 0.5 * lb, 0.5 * kSqrt3 * lb);
}

std::int32_t LatticeComplex::node_index(NodeId n) const {
  auto it = node_lookup_.find(pack(n.a, n.b));
  return it == node_lookup_.end() ? -1 : it->second;
}

std::int32_t LatticeComplex::triangle_index(TriangleId t) const {
  auto it = tri_lookup_.find(pack_tri(t));
  return it == tri_lookup_.end() ? -1 : it->second;
}

std::vector<std::int32_t> LatticeComplex::incident_triangles(const Bond& bond) const {
  const NodeId n = nodes[bond.i];
  TriangleId cand[2];
  switch (bond.dir) {
    case 0:  // +e1 edge (a,b)-(a+1,b)
      cand[0] = {n.a, n.b, Orientation::Up};
      cand[1] = {n.a, n.b, Orientation::Down};
      break;
    case 1:  // +nu edge (a,b)-(a,b+1)
      cand[0] = {n.a, n.b, Orientation::Up};
      cand[1] = {n.a - 1, n.b + 1, Orientation::Down};
      break;
    default:  // +eta edge (a,b)-(a-1,b+1)
      cand[0] = {n.a - 1, n.b, Orientation::Up};
      cand[1] = {n.a - 1, n.b + 1, Orientation::Down};
      break;
  }
  std::vector<std::int32_t> out;
  for (const TriangleId& t : cand) {
    std::int32_t idx = triangle_index(t);
    if (idx >= 0) out.push_back(idx);
  }
  return out;
}

std::vector<std::int32_t> LatticeComplex::triangles_at_node(std::uint32_t node_idx) const {
  const NodeId n = nodes[node_idx];
  const TriangleId fan[6] = {
      {n.a, n.b, Orientation::Up},         {n.a - 1, n.b, Orientation::Up},
      {n.a, n.b - 1, Orientation::Up},     {n.a, n.b, Orientation::Down},
      {n.a - 1, n.b, Orientation::Down},   {n.a - 1, n.b + 1, Orientation::Down}};
  std::vector<std::int32_t> out;
  for (const TriangleId& t : fan) {
    std::int32_t idx = triangle_index(t);
    if (idx >= 0) out.push_back(idx);
  }
  return out;
}

LatticeComplex build_lattice(const ConvexPolygon& domain, double epsilon) {
  domain.validate();
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (!(epsilon < domain.diameter())) throw Error("epsilon exceeds domain diameter");

  LatticeComplex cx;
  cx.epsilon = epsilon;
  cx.domain = domain;

  double xmin = domain.vertices[0].x(), xmax = xmin, ymin = domain.vertices[0].y(), ymax = ymin;
  for (const Vec2& v : domain.vertices) {
    xmin = std::min(xmin, v.x());
    xmax = std::max(xmax, v.x());
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }

  const double row_h = 0.5 * kSqrt3 * epsilon;
  const std::int64_t b_lo = std::int64_t(std::floor(ymin / row_h)) - 2;
  const std::int64_t b_hi = std::int64_t(std::ceil(ymax / row_h)) + 2;
  if (b_hi - b_lo > 2'000'000) throw Error("lattice too large for this epsilon");

  auto node_pos = [&](std::int64_t a, std::int64_t b) -> Vec2 {
    return epsilon * Vec2(double(a) + 0.5 * double(b), 0.5 * kSqrt3 * double(b));
  };
  auto inside = [&](std::int64_t a, std::int64_t b) {
    return domain.contains_closed(node_pos(a, b));
  };

  // Enumerate triangles row by row; a triangle enters the complex when all
  // three vertices are interior (sufficient under convexity).
  for (std::int64_t b = b_lo; b <= b_hi; ++b) {
    const std::int64_t a_lo = std::int64_t(std::floor(xmin / epsilon - 0.5 * double(b))) - 2;
    const std::int64_t a_hi = std::int64_t(std::ceil(xmax / epsilon - 0.5 * double(b))) + 2;
    for (std::int64_t a = a_lo; a <= a_hi; ++a) {
      const bool v00 = inside(a, b);
      if (v00 && inside(a + 1, b) && inside(a, b + 1))
        cx.triangles.push_back({std::int32_t(a), std::int32_t(b), Orientation::Up});
      if (v00 && inside(a + 1, b - 1) && inside(a + 1, b))
        cx.triangles.push_back({std::int32_t(a), std::int32_t(b), Orientation::Down});
    }
  }
  if (cx.triangles.empty()) throw Error("empty complex: no lattice triangle fits in the domain");
  std::sort(cx.triangles.begin(), cx.triangles.end());

  for (std::size_t i = 0; i < cx.triangles.size(); ++i)
    cx.tri_lookup_[pack_tri(cx.triangles[i])] = std::int32_t(i);

  // Nodes are exactly the triangle vertices.
  std::vector<NodeId> verts;
  verts.reserve(cx.triangles.size() * 3);
  for (const TriangleId& t : cx.triangles)
    for (const NodeId& v : LatticeComplex::triangle_vertices(t)) verts.push_back(v);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  cx.nodes = std::move(verts);
  for (std::size_t i = 0; i < cx.nodes.size(); ++i)
    cx.node_lookup_[pack(cx.nodes[i].a, cx.nodes[i].b)] = std::int32_t(i);

  cx.tri_nodes.resize(cx.triangles.size());
  for (std::size_t i = 0; i < cx.triangles.size(); ++i) {
    auto vs = LatticeComplex::triangle_vertices(cx.triangles[i]);
    for (int k = 0; k < 3; ++k) cx.tri_nodes[i][k] = std::uint32_t(cx.node_index(vs[k]));
  }

  // Bonds: node pairs at distance epsilon.  Visiting only the positive steps
  // from each node covers every unordered pair once.
  cx.neighbor.assign(cx.nodes.size(), {-1, -1, -1, -1, -1, -1});
  cx.neighbor_bond.assign(cx.nodes.size(), {-1, -1, -1, -1, -1, -1});
  for (std::uint32_t i = 0; i < cx.nodes.size(); ++i) {
    const NodeId n = cx.nodes[i];
    for (int d = 0; d < 6; ++d) {
      std::int32_t j = cx.node_index({n.a + kNeighborSteps[d][0], n.b + kNeighborSteps[d][1]});
      cx.neighbor[i][d] = j;
    }
  }
  for (std::uint32_t i = 0; i < cx.nodes.size(); ++i) {
    for (int d = 0; d < 3; ++d) {
      std::int32_t j = cx.neighbor[i][d];
      if (j < 0) continue;
      Bond bond{i, std::uint32_t(j), std::uint8_t(d), false};
      bond.dangling = cx.incident_triangles(bond).empty();
      if (bond.dangling) ++cx.dangling_bond_count;
      std::int32_t bond_idx = std::int32_t(cx.bonds.size());
      cx.bonds.push_back(bond);
      cx.neighbor_bond[i][d] = bond_idx;
      cx.neighbor_bond[j][d + 3] = bond_idx;
    }
  }

  cx.node_interior.assign(cx.nodes.size(), false);
  for (std::uint32_t i = 0; i < cx.nodes.size(); ++i)
    cx.node_interior[i] = cx.triangles_at_node(i).size() == 6;

  // Connectivity of the triangle union through shared edges, and the Euler
  // characteristic V - E + F of the union (1 for a disk).
  DisjointSet ds(cx.triangles.size());
  for (const Bond& bond : cx.bonds) {
    auto inc = cx.incident_triangles(bond);
    if (inc.size() == 2) ds.unite(inc[0], inc[1]);
  }
  std::size_t components = 0;
  for (std::size_t i = 0; i < cx.triangles.size(); ++i)
    if (ds.find(std::int32_t(i)) == std::int32_t(i)) ++components;
  cx.edge_connected = components == 1;
  const std::int64_t euler = std::int64_t(cx.nodes.size()) -
                             std::int64_t(cx.bonds.size() - cx.dangling_bond_count) +
                             std::int64_t(cx.triangles.size());
  cx.simply_connected = cx.edge_connected && euler == 1;

  return cx;
}

}  // namespace dislat
