#pragma once

#include "dislat/fields.hpp"

#include <functional>
#include <unordered_map>
#include <vector>

namespace dislat {

// Isotropic elasticity with both Lame parameters equal to 1:
//   C beta : beta = |tr beta|^2 + 2 |beta_sym|^2.
struct ElasticTensor {
  static Mat2 apply(const Mat2& beta) {
    Mat2 sym = 0.5 * (beta + beta.transpose());
    return beta.trace() * Mat2::Identity() + 2.0 * sym;
  }
  static double double_contraction(const Mat2& beta) {
    Mat2 sym = 0.5 * (beta + beta.transpose());
    double tr = beta.trace();
    return tr * tr + 2.0 * sym.squaredNorm();
  }
};

// Piecewise constant strain over a stated set of triangles.
struct TriangleStrainField {
  std::unordered_map<std::uint32_t, Mat2> values;  // triangle index -> strain

  bool contains(std::uint32_t tri) const { return values.count(tri) != 0; }
  const Mat2& at(std::uint32_t tri) const { return values.at(tri); }
};

// Harmonic bond energy over the given bonds:
//   (1/(2 eps^2)) sum over ordered pairs of [(du(i,j) - sigma(i,j)) . (j-i)]^2.
// Ordered pairs double every unordered bond, so this is twice the
// unordered-bond sum; all derived constants assume that convention.
double energy(const LatticeComplex& cx, const DisplacementField& u, const SlipField& sigma,
              const std::vector<std::uint32_t>& bond_subset);

double energy(const LatticeComplex& cx, const DisplacementField& u, const SlipField& sigma);

// Energy of one triangle under a constant strain:
//   eps^2 (|e1' b e1|^2 + |nu' b nu|^2 + |eta' b eta|^2),
// which equals eps^2 (3/8) C b : b.
double triangle_energy_of_constant_strain(const Mat2& beta, double epsilon);

// Per-triangle constant strain solving beta (j-i) = du(i,j) - sigma(i,j) on
// the edges of every triangle in `region`.  Requires zero circulation of
// du - sigma on each of them; the redundant third edge equation is checked to
// tolerance 1e-10 relative.  Throws Error naming the first charged triangle.
TriangleStrainField reconstruct_strain(const LatticeComplex& cx, const DisplacementField& u,
                                       const SlipField& sigma,
                                       const std::vector<std::uint32_t>& region);

// Sum of beta_T (edge) along a closed lattice node loop whose edges all lie
// in the reconstructed region; equals the enclosed dislocation mass.
Vec2 loop_circulation_of_strain(const LatticeComplex& cx, const TriangleStrainField& strain,
                                const std::vector<std::uint32_t>& loop);

// Nonlinear pair energy of a deformation v (nodes to deformed positions):
//   eps^2 sum over ordered pairs of psi(|dv(i,j)| / eps).
double nonlinear_energy(const LatticeComplex& cx, const std::vector<Vec2>& deformed,
                        const std::function<double(double)>& psi, double epsilon);

// Bonds with both endpoints among the given nodes (membership bitmap sized to
// the complex).  This is the bond set of the localized energy on a node set.
std::vector<std::uint32_t> bonds_within(const LatticeComplex& cx,
                                        const std::vector<bool>& node_in);

}  // namespace dislat
