#include "dislat/fields.hpp"

namespace dislat {

Vec2 circulation(const LatticeComplex& cx, const BondVectorField& field, std::uint32_t tri_idx) {
  const auto& v = cx.tri_nodes[tri_idx];
  return field(v[0], v[1]) + field(v[1], v[2]) + field(v[2], v[0]);
}

LatticeVector slip_circulation(const LatticeComplex& cx, const SlipField& sigma,
                               std::uint32_t tri_idx) {
  const auto& v = cx.tri_nodes[tri_idx];
  return sigma.get(v[0], v[1]) + sigma.get(v[1], v[2]) + sigma.get(v[2], v[0]);
}

DislocationMeasure dislocation_measure(const LatticeComplex& cx, const SlipField& sigma) {
  DislocationMeasure mu;
  mu.epsilon_scaled = true;
  if (sigma.empty()) return mu;
  for (std::uint32_t t = 0; t < cx.triangle_count(); ++t) {
    LatticeVector c = slip_circulation(cx, sigma, t);
    if (!c.is_zero()) mu.add(cx.triangles[t], -c);
  }
  return mu;
}

bool check_mild_separation(const DislocationMeasure& mu, const LatticeComplex& cx) {
  for (const auto& [tid, w] : mu.atoms) {
    std::int32_t t = cx.triangle_index(tid);
    if (t < 0) return false;
    // All three vertices interior, so the triangle's boundary avoids the
    // boundary of the triangulated region.
    for (std::uint32_t v : cx.tri_nodes[t])
      if (!cx.node_interior[v]) return false;
    // No charged triangle among the ones sharing a vertex.
    for (std::uint32_t v : cx.tri_nodes[t]) {
      for (std::int32_t s : cx.triangles_at_node(v)) {
        if (s == t) continue;
        if (mu.atoms.count(cx.triangles[s])) return false;
      }
    }
  }
  return true;
}

bool check_volume_constraint(const LatticeComplex& cx, const SlipField& sigma,
                             std::uint32_t tri_idx) {
  const auto& v = cx.tri_nodes[tri_idx];
  for (int r = 0; r < 3; ++r) {
    std::uint32_t i = v[r], j = v[(r + 1) % 3], k = v[(r + 2) % 3];
    LatticeVector ji = cx.bond_step(i, j);
    LatticeVector ki = cx.bond_step(i, k);
    if (wedge_z(sigma.get(i, k), ji) - wedge_z(sigma.get(i, j), ki) != 0) return false;
  }
  return true;
}

SlipField gauge_transform(const LatticeComplex& cx, const SlipField& sigma,
                          const std::vector<LatticeVector>& psi) {
  if (psi.size() != cx.node_count()) throw Error("gauge field must cover every node");
  SlipField out;
  for (const Bond& b : cx.bonds) {
    LatticeVector v = sigma.get(b.i, b.j) + psi[b.j] - psi[b.i];
    if (!v.is_zero()) out.set(b.i, b.j, v);
  }
  return out;
}

}  // namespace dislat
