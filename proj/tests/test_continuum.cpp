#include "dislat/continuum.hpp"

#include "dislat/energy.hpp"
#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

using namespace dislat;
using namespace dislat::testing;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Trapezoid circulation of the singular strain along the circle of radius r.
Vec2 circulation_on_circle(BurgersVector b, double r, int panels = 4096) {
  Vec2 sum = Vec2::Zero();
  for (int k = 0; k < panels; ++k) {
    double theta = 2.0 * kPi * k / panels;
    Vec2 x(r * std::cos(theta), r * std::sin(theta));
    Vec2 tau(-std::sin(theta), std::cos(theta));
    sum += beta_singular(b, x) * tau;
  }
  return sum * (2.0 * kPi * r / panels);
}

// Row divergence of C beta by central differences.
Vec2 div_stress_fd(BurgersVector b, const Vec2& x, double h) {
  auto stress = [&](const Vec2& y) { return ElasticTensor::apply(beta_singular(b, y)); };
  Mat2 dx = (stress(x + Vec2(h, 0)) - stress(x - Vec2(h, 0))) / (2.0 * h);
  Mat2 dy = (stress(x + Vec2(0, h)) - stress(x - Vec2(0, h))) / (2.0 * h);
  return Vec2(dx(0, 0) + dy(0, 1), dx(1, 0) + dy(1, 1));
}

}  // namespace

TEST_CASE("self energy closed form") {
  CHECK(psi(lattice_e1()) == doctest::Approx(1.0 / (3.0 * kPi)).epsilon(1e-14));
  CHECK(psi(LatticeVector{0, 0}) == 0.0);
  CHECK(psi(LatticeVector{2, 0}) == doctest::Approx(4.0 / (3.0 * kPi)).epsilon(1e-14));
}

TEST_CASE("self energy quadrature matches the closed form") {
  for (int rep = 0; rep < 20; ++rep) {
    BurgersVector b = random_lattice_vector(4);
    CHECK(std::abs(psi_quadrature(b) - psi(b)) < 1e-8 * std::max(1.0, psi(b)));
  }
}

TEST_CASE("singular strain is homogeneous of degree -1") {
  BurgersVector b{1, -2};
  for (int rep = 0; rep < 30; ++rep) {
    Vec2 x(uniform(-2.0, 2.0), uniform(-2.0, 2.0));
    if (x.norm() < 0.1) continue;
    CHECK((beta_singular(b, 2.0 * x) - 0.5 * beta_singular(b, x)).norm() <=
          1e-12 * beta_singular(b, x).norm());
  }
  CHECK_THROWS_AS(beta_singular(b, Vec2(0.0, 0.0)), Error);
}

TEST_CASE("singular strain circulates the Burgers vector") {
  for (BurgersVector b : {lattice_e1(), lattice_nu(), LatticeVector{2, -1}}) {
    for (double r : {0.5, 1.0, 2.0})
      CHECK((circulation_on_circle(b, r) - b.embed()).norm() < 1e-8);
  }
}

TEST_CASE("singular strain is in equilibrium away from the core") {
  BurgersVector b = lattice_e1();
  for (Vec2 x : {Vec2(0.9, 0.3), Vec2(-0.5, 0.8), Vec2(0.2, -1.1)}) {
    double r1 = div_stress_fd(b, x, 1e-2).norm();
    double r2 = div_stress_fd(b, x, 1e-3).norm();
    CHECK(r2 < 1e-4);
    // Central differences: order two or better.
    if (r2 > 1e-12) {
      double order = std::log(r1 / r2) / std::log(10.0);
      CHECK(order > 1.7);
    }
  }
}

TEST_CASE("displacement jumps by the Burgers vector across the cut") {
  for (BurgersVector b : {lattice_e1(), -lattice_nu(), lattice_eta()}) {
    for (double cut : {0.0, kPi / 3.0}) {
      const double rho = 0.8, delta = 1e-9;
      Vec2 above(rho * std::cos(cut + delta), rho * std::sin(cut + delta));
      Vec2 below(rho * std::cos(cut - delta), rho * std::sin(cut - delta));
      Vec2 jump = displacement_singular(b, below, cut) - displacement_singular(b, above, cut);
      CHECK((jump - b.embed()).norm() < 1e-7);
    }
  }
}

TEST_CASE("displacement gradient matches the singular strain") {
  BurgersVector b{1, 1};
  for (Vec2 x : {Vec2(0.4, 0.7), Vec2(-0.9, 0.2), Vec2(-0.3, -0.6)}) {
    double gap_prev = -1.0;
    for (double h : {1e-3, 1e-4}) {
      Mat2 fd;
      // Row r of the strain is the gradient of displacement component r.
      Vec2 dX = (displacement_singular(b, x + Vec2(h, 0)) -
                 displacement_singular(b, x - Vec2(h, 0))) /
                (2.0 * h);
      Vec2 dY = (displacement_singular(b, x + Vec2(0, h)) -
                 displacement_singular(b, x - Vec2(0, h))) /
                (2.0 * h);
      fd << dX.x(), dY.x(), dX.y(), dY.y();
      double gap = (fd - beta_singular(b, x)).norm();
      if (gap_prev > 0.0) CHECK(gap < 0.05 * gap_prev);
      gap_prev = gap;
    }
    CHECK(gap_prev < 1e-6);
  }
}

TEST_CASE("displacement anchors at angle zero") {
  BurgersVector b{2, -1};
  Vec2 u = displacement_singular(b, Vec2(1.0, 1e-12));
  CHECK(u.norm() < 1e-10);
}

TEST_CASE("decomposition cost scan matches brute force") {
  CHECK(phi_cost(LatticeVector{0, 0}) == 0);
  CHECK(phi(lattice_e1()) == doctest::Approx(1.0 / (3.0 * kPi)).epsilon(1e-14));
  CHECK(phi(LatticeVector{1, 1}) == doctest::Approx(2.0 / (3.0 * kPi)).epsilon(1e-14));
  CHECK(phi(LatticeVector{2, 2}) == doctest::Approx(4.0 / (3.0 * kPi)).epsilon(1e-14));
  for (std::int64_t p = -5; p <= 5; ++p)
    for (std::int64_t q = -5; q <= 5; ++q)
      CHECK(phi_cost({p, q}) == phi_cost_bruteforce({p, q}));
}

TEST_CASE("decomposition cost symmetries") {
  for (std::int64_t p = -5; p <= 5; ++p) {
    for (std::int64_t q = -5; q <= 5; ++q) {
      LatticeVector b{p, q};
      CHECK(phi_cost(-b) == phi_cost(b));
      // Rotation by 60 degrees maps (p, q) to (-q, p + q).
      CHECK(phi_cost({-q, p + q}) == phi_cost(b));
    }
  }
}

TEST_CASE("relaxed density below the self energy, equal on unit vectors") {
  for (std::int64_t p = -5; p <= 5; ++p) {
    for (std::int64_t q = -5; q <= 5; ++q) {
      LatticeVector b{p, q};
      CHECK(phi(b) <= psi(b) + 1e-14);
      if (b.norm_sq() == 1) CHECK(phi(b) == doctest::Approx(psi(b)).epsilon(1e-14));
    }
  }
}

TEST_CASE("relaxed density is subadditive") {
  for (int rep = 0; rep < 200; ++rep) {
    LatticeVector a = random_lattice_vector(5), b = random_lattice_vector(5);
    CHECK(phi_cost(a + b) <= phi_cost(a) + phi_cost(b));
  }
}

TEST_CASE("predicted scaling limit") {
  CHECK(predicted_limit({lattice_e1()}) ==
        doctest::Approx(kSqrt3 / (6.0 * kPi)).epsilon(1e-14));
  CHECK(predicted_limit({}) == 0.0);
  CHECK(predicted_limit({lattice_e1(), -lattice_e1()}) ==
        doctest::Approx(kSqrt3 / (3.0 * kPi)).epsilon(1e-14));
}
