#pragma once

#include "dislat/experiments.hpp"

#include <random>
#include <vector>

namespace dislat::testing {

inline std::mt19937& rng() {
  static std::mt19937 engine(0x5eed1234);
  return engine;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng());
}

inline LatticeVector random_lattice_vector(std::int64_t bound) {
  return {uniform_int(-bound, bound), uniform_int(-bound, bound)};
}

inline Mat2 random_matrix(double scale = 1.0) {
  Mat2 m;
  m << uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale),
      uniform(-scale, scale);
  return m;
}

inline DisplacementField random_displacement(const LatticeComplex& cx, double scale) {
  DisplacementField u(cx.node_count());
  for (auto& v : u.values) v = Vec2(uniform(-scale, scale), uniform(-scale, scale));
  return u;
}

inline std::vector<LatticeVector> random_gauge(const LatticeComplex& cx, std::int64_t bound) {
  std::vector<LatticeVector> psi(cx.node_count());
  for (auto& v : psi) v = random_lattice_vector(bound);
  return psi;
}

// A slip field with zero circulation on every triangle: the differential of a
// random integer node field.
inline SlipField random_exact_slip(const LatticeComplex& cx, std::int64_t bound) {
  return gauge_transform(cx, SlipField{}, random_gauge(cx, bound));
}

// Closed counterclockwise hexagonal node loop of lattice radius r around the
// node (a, b); the first node is repeated at the end.
inline std::vector<std::uint32_t> hexagon_loop(const LatticeComplex& cx, NodeId center, int r) {
  std::vector<std::uint32_t> loop;
  auto push = [&](std::int32_t a, std::int32_t b) {
    std::int32_t idx = cx.node_index({std::int32_t(center.a + a), std::int32_t(center.b + b)});
    if (idx < 0) throw Error("hexagon loop leaves the complex");
    loop.push_back(std::uint32_t(idx));
  };
  std::int32_t a = r, b = 0;
  const std::array<std::array<std::int32_t, 2>, 6> steps{
      {{-1, 1}, {-1, 0}, {0, -1}, {1, -1}, {1, 0}, {0, 1}}};
  push(a, b);
  for (const auto& s : steps) {
    for (int k = 0; k < r; ++k) {
      a += s[0];
      b += s[1];
      push(a, b);
    }
  }
  return loop;
}

// Brute-force decomposition cost over the full integer cube, independent of
// the scan in phi_cost.
inline std::int64_t phi_cost_bruteforce(LatticeVector b) {
  const std::int64_t N = std::llabs(b.p) + std::llabs(b.q);
  std::int64_t best = N;  // z3 = 0 decomposition
  for (std::int64_t z1 = -N; z1 <= N; ++z1)
    for (std::int64_t z2 = -N; z2 <= N; ++z2)
      for (std::int64_t z3 = -N; z3 <= N; ++z3) {
        if (z1 - z3 != b.p || z2 + z3 != b.q) continue;
        best = std::min<std::int64_t>(best, std::llabs(z1) + std::llabs(z2) + std::llabs(z3));
      }
  return best;
}

}  // namespace dislat::testing
