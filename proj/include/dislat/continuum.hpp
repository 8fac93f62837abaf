#pragma once

#include "dislat/geometry.hpp"

#include <vector>

namespace dislat {

// Burgers vectors live on the lattice.
using BurgersVector = LatticeVector;

// Angular profile f(theta) of the singular strain of an isotropic edge
// dislocation with Burgers vector b (unit Lame parameters).
Vec2 singular_f(const Vec2& b, double theta);

// Radial constant g = -(1/(6 pi)) b_perp.
Vec2 singular_g(const Vec2& b);

// Antiderivative F(theta) of f with F(0) = 0, valid for any real theta.
Vec2 singular_F(const Vec2& b, double theta);

// Singular strain at x != 0:
//   beta(rho, theta) = (1/rho) (f(theta) (x) theta_hat + g (x) rho_hat).
// Homogeneous of degree -1; circulation around the origin equals b and
// Div C beta = 0 away from the origin.
Mat2 beta_singular(BurgersVector b, const Vec2& x);

// Displacement with gradient beta_singular, branch cut along the half-line at
// angle cut_angle:  u = F(theta) + g log rho with theta in
// [cut_angle, cut_angle + 2 pi).  Throws on x = 0.
Vec2 displacement_singular(BurgersVector b, const Vec2& x, double cut_angle = 0.0);

// Self energy per unit log: psi(b) = |b|^2 / (3 pi).
double psi(BurgersVector b);

// Angular quadrature of the self energy, (1/2) C Gamma : Gamma integrated
// over [0, 2 pi) with a trapezoid rule on `panels` points.
double psi_quadrature(BurgersVector b, int panels = 4096);

// Minimal decomposition cost: min { |z1|+|z2|+|z3| : b = z1 e1 + z2 nu + z3 eta }.
std::int64_t phi_cost(BurgersVector b);

// Relaxed density phi(b) = phi_cost(b) / (3 pi).
double phi(BurgersVector b);

// Scaling-limit prediction (sqrt(3)/2) sum_k phi(b^k).
double predicted_limit(const std::vector<BurgersVector>& bs);

}  // namespace dislat
