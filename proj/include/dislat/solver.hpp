#pragma once

#include "dislat/energy.hpp"
#include "dislat/recovery.hpp"

#include <optional>
#include <vector>

namespace dislat {

struct SolveOptions {
  double tol = 1e-10;            // relative residual target
  double max_iter_factor = 50.0; // cap = factor * (2 * node count)
};

// Quadratic form of the bond energy at fixed slip:
//   energy(u) = 1/2 u' A u - b' u + offset,
// applied matrix-free over a bond subset.  A is symmetric positive
// semidefinite; translations and the infinitesimal rotation of the node
// positions span its kernel.
class QuadraticSystem {
 public:
  QuadraticSystem(const LatticeComplex& cx, const SlipField& sigma,
                  const std::vector<std::uint32_t>& bond_subset);
  QuadraticSystem(const LatticeComplex& cx, const SlipField& sigma);

  void apply(const std::vector<Vec2>& in, std::vector<Vec2>& out) const;
  const std::vector<Vec2>& rhs() const { return rhs_; }
  double energy_offset() const { return offset_; }
  double energy_of(const std::vector<Vec2>& u) const;

  // Inverse 2x2 diagonal blocks (Jacobi preconditioner).
  const std::vector<Mat2>& diag_inverse() const { return diag_inv_; }
  std::size_t node_count() const { return n_; }

 private:
  void assemble(const LatticeComplex& cx, const SlipField& sigma,
                const std::vector<std::uint32_t>& bonds);
  std::size_t n_ = 0;
  struct Term {
    std::uint32_t i, j;
    Vec2 e;       // edge vector, |e| = epsilon
    double coef;  // 2 / eps^2
  };
  std::vector<Term> terms_;
  std::vector<Vec2> rhs_;
  std::vector<Mat2> diag_inv_;
  double offset_ = 0.0;
};

struct MinimizeResult {
  DisplacementField u;
  double energy = 0.0;
  int iterations = 0;
  double relative_residual = 0.0;
};

// Thrown when the conjugate gradient iteration cap is exceeded; carries the
// best iterate reached.
struct SolveError : Error {
  SolveError(const std::string& what, MinimizeResult best_arg)
      : Error(what), best(std::move(best_arg)) {}
  MinimizeResult best;
};

// Minimum of energy(., sigma) over displacements, by preconditioned conjugate
// gradient on the consistent singular normal equations, started from zero.
// The minimizer is determined up to translations and the infinitesimal
// rotation.
MinimizeResult minimize_displacement(const LatticeComplex& cx, const SlipField& sigma,
                                     const SolveOptions& opts = {});
MinimizeResult minimize_displacement(const LatticeComplex& cx, const SlipField& sigma,
                                     const SolveOptions& opts,
                                     const std::vector<std::uint32_t>& bond_subset);

struct FResult {
  double value = 0.0;
  MinimizeResult minimize;
  SlipField slip;             // representative slip actually minimized
  int dangling_sweeps = 0;    // coordinate-descent sweeps over dangling bonds
};

// Minimal energy over all (u, sigma) with dislocation measure mu, through the
// half-line representative slip and gauge equivalence; slips on dangling
// bonds (edges of no triangle) are optimized by bounded enumeration.
// Validates that the complex is edge-connected and simply connected and that
// mu satisfies mild separation.
FResult compute_F_of_mu(const DislocationMeasure& mu, const LatticeComplex& cx,
                        const SolveOptions& opts = {});

// Convenience: F for a slip field given explicitly (same dangling handling).
FResult minimize_over_gauge_class(const SlipField& sigma, const LatticeComplex& cx,
                                  const SolveOptions& opts = {});

}  // namespace dislat
