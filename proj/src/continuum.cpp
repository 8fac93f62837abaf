#include "dislat/continuum.hpp"

#include "dislat/energy.hpp"

#include <cmath>
#include <cstdlib>

namespace dislat {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Vec2 singular_f(const Vec2& b, double theta) {
  double c2 = std::cos(2.0 * theta), s2 = std::sin(2.0 * theta);
  Vec2 osc(-b.x() * c2 - b.y() * s2, b.y() * c2 - b.x() * s2);
  return b / (2.0 * kPi) - osc / (3.0 * kPi);
}

Vec2 singular_g(const Vec2& b) { return Vec2(b.y(), -b.x()) / (6.0 * kPi); }

Vec2 singular_F(const Vec2& b, double theta) {
  double c2 = std::cos(2.0 * theta), s2 = std::sin(2.0 * theta);
  // Termwise antiderivative of the oscillatory part of f.
  Vec2 osc_int(-0.5 * b.x() * s2 + 0.5 * b.y() * (c2 - 1.0),
               0.5 * b.y() * s2 + 0.5 * b.x() * (c2 - 1.0));
  return theta * b / (2.0 * kPi) - osc_int / (3.0 * kPi);
}

Mat2 beta_singular(BurgersVector b, const Vec2& x) {
  double rho = x.norm();
  if (!(rho > 0.0)) throw Error("beta_singular is undefined at the origin");
  Vec2 be = b.embed();
  double theta = std::atan2(x.y(), x.x());
  Vec2 rho_hat(std::cos(theta), std::sin(theta));
  Vec2 theta_hat(-std::sin(theta), std::cos(theta));
  return (singular_f(be, theta) * theta_hat.transpose() +
          singular_g(be) * rho_hat.transpose()) /
         rho;
}

Vec2 displacement_singular(BurgersVector b, const Vec2& x, double cut_angle) {
  double rho = x.norm();
  if (!(rho > 0.0)) throw Error("displacement_singular is undefined at the origin");
  Vec2 be = b.embed();
  double theta = std::atan2(x.y(), x.x());
  // Shift into the branch [cut_angle, cut_angle + 2 pi).
  double rel = std::fmod(theta - cut_angle, 2.0 * kPi);
  if (rel < 0.0) rel += 2.0 * kPi;
  return singular_F(be, cut_angle + rel) + singular_g(be) * std::log(rho);
}

double psi(BurgersVector b) { return double(b.norm_sq()) / (3.0 * kPi); }

double psi_quadrature(BurgersVector b, int panels) {
  Vec2 be = b.embed();
  Vec2 g = singular_g(be);
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    double theta = 2.0 * kPi * double(k) / double(panels);
    Vec2 rho_hat(std::cos(theta), std::sin(theta));
    Vec2 theta_hat(-std::sin(theta), std::cos(theta));
    Mat2 gamma = singular_f(be, theta) * theta_hat.transpose() + g * rho_hat.transpose();
    sum += 0.5 * ElasticTensor::double_contraction(gamma);
  }
  return sum * 2.0 * kPi / double(panels);
}

std::int64_t phi_cost(BurgersVector b) {
  // With eta = nu - e1, the decomposition b = z1 e1 + z2 nu + z3 eta forces
  // z1 = p + z3 and z2 = q - z3, leaving a one-dimensional scan.
  const std::int64_t range = std::llabs(b.p) + std::llabs(b.q);
  std::int64_t best = std::llabs(b.p) + std::llabs(b.q);
  for (std::int64_t z3 = -range; z3 <= range; ++z3) {
    std::int64_t cost = std::llabs(b.p + z3) + std::llabs(b.q - z3) + std::llabs(z3);
    best = std::min(best, cost);
  }
  return best;
}

double phi(BurgersVector b) { return double(phi_cost(b)) / (3.0 * kPi); }

double predicted_limit(const std::vector<BurgersVector>& bs) {
  double sum = 0.0;
  for (const BurgersVector& b : bs) sum += phi(b);
  return 0.5 * kSqrt3 * sum;
}

}  // namespace dislat
