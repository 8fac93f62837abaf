#pragma once

#include "dislat/lattice.hpp"

#include <functional>
#include <map>
#include <unordered_map>
#include <vector>

namespace dislat {

// Plastic slip: antisymmetric map from oriented bonds to lattice vectors,
// stored in integer lattice coordinates.  The physical slip of bond (i,j) is
// epsilon * get(i,j).embed().  Unset bonds read as zero.
class SlipField {
 public:
  LatticeVector get(std::uint32_t i, std::uint32_t j) const {
    auto it = values_.find(key(i, j));
    if (it == values_.end()) return {};
    return i < j ? it->second : -it->second;
  }

  void set(std::uint32_t i, std::uint32_t j, LatticeVector v) {
    if (i >= j) {
      std::swap(i, j);
      v = -v;
    }
    if (v.is_zero())
      values_.erase(key(i, j));
    else
      values_[key(i, j)] = v;
  }

  void add(std::uint32_t i, std::uint32_t j, LatticeVector v) { set(i, j, get(i, j) + v); }

  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }

 private:
  static std::uint64_t key(std::uint32_t i, std::uint32_t j) {
    return i < j ? (std::uint64_t(i) << 32) | j : (std::uint64_t(j) << 32) | i;
  }
  std::unordered_map<std::uint64_t, LatticeVector> values_;
};

// Node-indexed real displacement, one 2-vector per node of the complex.
struct DisplacementField {
  std::vector<Vec2> values;

  explicit DisplacementField(std::size_t node_count = 0) : values(node_count, Vec2::Zero()) {}
  Vec2& operator[](std::uint32_t i) { return values[i]; }
  const Vec2& operator[](std::uint32_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

// Atomic measure on triangle barycenters with lattice-vector weights.
// With epsilon_scaled set, the physical weight of an atom is
// epsilon * weight.embed(); this is the natural scaling of measures read off
// a slip field.  Zero-weight atoms are never stored.
struct DislocationMeasure {
  std::map<TriangleId, LatticeVector> atoms;
  bool epsilon_scaled = true;

  void add(TriangleId t, LatticeVector w) {
    auto it = atoms.find(t);
    if (it == atoms.end()) {
      if (!w.is_zero()) atoms.emplace(t, w);
      return;
    }
    it->second = it->second + w;
    if (it->second.is_zero()) atoms.erase(it);
  }

  bool empty() const { return atoms.empty(); }

  friend bool operator==(const DislocationMeasure& x, const DislocationMeasure& y) {
    return x.epsilon_scaled == y.epsilon_scaled && x.atoms == y.atoms;
  }
};

// Generic oriented-bond field used by the real-valued circulation.
using BondVectorField = std::function<Vec2(std::uint32_t, std::uint32_t)>;

// Discrete circulation V(i,j) + V(j,k) + V(k,i) over the counterclockwise
// vertex triple of the triangle.
Vec2 circulation(const LatticeComplex& cx, const BondVectorField& field, std::uint32_t tri_idx);

// Exact integer circulation of a slip field.
LatticeVector slip_circulation(const LatticeComplex& cx, const SlipField& sigma,
                               std::uint32_t tri_idx);

// mu[sigma]: atom -d sigma(T) at the barycenter of every triangle T with
// nonzero circulation.  Exact integer weights, epsilon_scaled.
DislocationMeasure dislocation_measure(const LatticeComplex& cx, const SlipField& sigma);

// Mild separation: every charged triangle keeps its boundary off the boundary
// of the triangulated region, and no two charged triangles share a vertex or
// an edge.
bool check_mild_separation(const DislocationMeasure& mu, const LatticeComplex& cx);

// Linearized volume constraint on one triangle:
//   sigma(i,k) ^ (j-i) - sigma(i,j) ^ (k-i) = 0
// for all three counterclockwise vertex triples.  Exact integer test.
bool check_volume_constraint(const LatticeComplex& cx, const SlipField& sigma,
                             std::uint32_t tri_idx);

// sigma'(i,j) = sigma(i,j) + psi(j) - psi(i) for a node-indexed lattice field
// psi; preserves the dislocation measure exactly.
SlipField gauge_transform(const LatticeComplex& cx, const SlipField& sigma,
                          const std::vector<LatticeVector>& psi);

}  // namespace dislat
