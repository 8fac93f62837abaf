#include "dislat/energy.hpp"

#include <cmath>
#include <string>

namespace dislat {

namespace {

double bond_residual(const LatticeComplex& cx, const DisplacementField& u, const SlipField& sigma,
                     const Bond& b) {
  Vec2 e = cx.node_position(b.j) - cx.node_position(b.i);
  Vec2 d = u[b.j] - u[b.i] - cx.epsilon * sigma.get(b.i, b.j).embed();
  return d.dot(e);
}

}  // namespace

double energy(const LatticeComplex& cx, const DisplacementField& u, const SlipField& sigma,
              const std::vector<std::uint32_t>& bond_subset) {
  double sum = 0.0;
  for (std::uint32_t bi : bond_subset) {
    double r = bond_residual(cx, u, sigma, cx.bonds[bi]);
    sum += r * r;
  }
  return sum / (cx.epsilon * cx.epsilon);
}

double energy(const LatticeComplex& cx, const DisplacementField& u, const SlipField& sigma) {
  double sum = 0.0;
  for (const Bond& b : cx.bonds) {
    double r = bond_residual(cx, u, sigma, b);
    sum += r * r;
  }
  return sum / (cx.epsilon * cx.epsilon);
}

double triangle_energy_of_constant_strain(const Mat2& beta, double epsilon) {
  const Vec2 e1 = lattice_e1().embed();
  const Vec2 nu = lattice_nu().embed();
  const Vec2 eta = lattice_eta().embed();
  double a = e1.dot(beta * e1);
  double b = nu.dot(beta * nu);
  double c = eta.dot(beta * eta);
  return epsilon * epsilon * (a * a + b * b + c * c);
}

TriangleStrainField reconstruct_strain(const LatticeComplex& cx, const DisplacementField& u,
                                       const SlipField& sigma,
                                       const std::vector<std::uint32_t>& region) {
  TriangleStrainField out;
  out.values.reserve(region.size());
  for (std::uint32_t t : region) {
    if (!slip_circulation(cx, sigma, t).is_zero()) {
      const TriangleId& id = cx.triangles[t];
      throw Error("reconstruct_strain: charged triangle (" + std::to_string(id.a) + "," +
                  std::to_string(id.b) + (id.orient == Orientation::Up ? ",Up)" : ",Down)"));
    }
    const auto& v = cx.tri_nodes[t];
    Vec2 e1 = cx.node_position(v[1]) - cx.node_position(v[0]);
    Vec2 e2 = cx.node_position(v[2]) - cx.node_position(v[0]);
    Vec2 d1 = u[v[1]] - u[v[0]] - cx.epsilon * sigma.get(v[0], v[1]).embed();
    Vec2 d2 = u[v[2]] - u[v[0]] - cx.epsilon * sigma.get(v[0], v[2]).embed();
    Mat2 edges, data;
    edges.col(0) = e1;
    edges.col(1) = e2;
    data.col(0) = d1;
    data.col(1) = d2;
    Mat2 beta = data * edges.inverse();

    // The third edge equation is the circulation; its residual must vanish.
    Vec2 e3 = cx.node_position(v[2]) - cx.node_position(v[1]);
    Vec2 d3 = u[v[2]] - u[v[1]] - cx.epsilon * sigma.get(v[1], v[2]).embed();
    double scale = std::max({1e-30, d1.norm(), d2.norm(), d3.norm()});
    if ((beta * e3 - d3).norm() > 1e-10 * scale)
      throw Error("reconstruct_strain: inconsistent edge data on a triangle");
    out.values.emplace(t, beta);
  }
  return out;
}

Vec2 loop_circulation_of_strain(const LatticeComplex& cx, const TriangleStrainField& strain,
                                const std::vector<std::uint32_t>& loop) {
  if (loop.size() < 3 || loop.front() != loop.back())
    throw Error("loop must be closed (first node repeated at the end)");
  Vec2 sum = Vec2::Zero();
  for (std::size_t s = 0; s + 1 < loop.size(); ++s) {
    std::uint32_t i = loop[s], j = loop[s + 1];
    LatticeVector step = cx.bond_step(i, j);
    if (step.norm_sq() != 1) throw Error("loop nodes must be consecutive nearest neighbors");
    int dir = -1;
    for (int d = 0; d < 6; ++d)
      if (kNeighborSteps[d][0] == step.p && kNeighborSteps[d][1] == step.q) dir = d;
    std::int32_t bond_idx = cx.neighbor_bond[i][dir];
    if (bond_idx < 0) throw Error("loop edge is not a bond of the complex");
    const Bond& b = cx.bonds[std::size_t(bond_idx)];
    const Mat2* beta = nullptr;
    for (std::int32_t t : cx.incident_triangles(b))
      if (strain.contains(std::uint32_t(t))) beta = &strain.at(std::uint32_t(t));
    if (beta == nullptr) throw Error("loop leaves the reconstructed region");
    sum += (*beta) * (cx.node_position(j) - cx.node_position(i));
  }
  return sum;
}

double nonlinear_energy(const LatticeComplex& cx, const std::vector<Vec2>& deformed,
                        const std::function<double(double)>& psi, double epsilon) {
  if (deformed.size() != cx.node_count()) throw Error("deformation must cover every node");
  double sum = 0.0;
  for (const Bond& b : cx.bonds) sum += psi((deformed[b.j] - deformed[b.i]).norm() / epsilon);
  return 2.0 * epsilon * epsilon * sum;
}

std::vector<std::uint32_t> bonds_within(const LatticeComplex& cx,
                                        const std::vector<bool>& node_in) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t bi = 0; bi < cx.bonds.size(); ++bi) {
    const Bond& b = cx.bonds[bi];
    if (node_in[b.i] && node_in[b.j]) out.push_back(bi);
  }
  return out;
}

}  // namespace dislat
