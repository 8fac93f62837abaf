#include "dislat/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dislat {

namespace {

std::vector<std::uint32_t> all_bonds(const LatticeComplex& cx) {
  std::vector<std::uint32_t> out(cx.bonds.size());
  std::iota(out.begin(), out.end(), 0u);
  return out;
}

double dot(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

// Orthonormal basis of the energy kernel: two translations and the
// infinitesimal rotation of the node positions, Gram-Schmidt orthogonalized.
std::vector<std::vector<Vec2>> kernel_basis(const LatticeComplex& cx) {
  const std::size_t n = cx.node_count();
  std::vector<std::vector<Vec2>> basis;
  std::vector<Vec2> tx(n, Vec2(1.0, 0.0)), ty(n, Vec2(0.0, 1.0)), rot(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Vec2 p = cx.node_position(i);
    rot[i] = Vec2(-p.y(), p.x());
  }
  for (auto& v : {tx, ty, rot}) {
    std::vector<Vec2> w = v;
    for (const auto& u : basis) {
      double c = dot(w, u);
      for (std::size_t i = 0; i < n; ++i) w[i] -= c * u[i];
    }
    double nrm = std::sqrt(dot(w, w));
    if (nrm > 1e-14) {
      for (auto& x : w) x /= nrm;
      basis.push_back(std::move(w));
    }
  }
  return basis;
}

void project_out(std::vector<Vec2>& v, const std::vector<std::vector<Vec2>>& basis) {
  for (const auto& u : basis) {
    double c = dot(v, u);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
  }
}

}  // namespace

QuadraticSystem::QuadraticSystem(const LatticeComplex& cx, const SlipField& sigma,
                                 const std::vector<std::uint32_t>& bond_subset) {
  assemble(cx, sigma, bond_subset);
}

QuadraticSystem::QuadraticSystem(const LatticeComplex& cx, const SlipField& sigma) {
  assemble(cx, sigma, all_bonds(cx));
}

void QuadraticSystem::assemble(const LatticeComplex& cx, const SlipField& sigma,
                               const std::vector<std::uint32_t>& bonds) {
  n_ = cx.node_count();
  const double eps = cx.epsilon;
  const double coef = 2.0 / (eps * eps);
  terms_.reserve(bonds.size());
  rhs_.assign(n_, Vec2::Zero());
  std::vector<Mat2> diag(n_, Mat2::Zero());
  offset_ = 0.0;
  for (std::uint32_t bi : bonds) {
    const Bond& b = cx.bonds[bi];
    Vec2 e = cx.node_position(b.j) - cx.node_position(b.i);
    terms_.push_back({b.i, b.j, e, coef});
    Mat2 block = coef * (e * e.transpose());
    diag[b.i] += block;
    diag[b.j] += block;
    double se = (eps * sigma.get(b.i, b.j).embed()).dot(e);
    if (se != 0.0) {
      rhs_[b.i] -= coef * se * e;
      rhs_[b.j] += coef * se * e;
      offset_ += se * se / (eps * eps);
    }
  }
  diag_inv_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    // Every node of the complex touches a triangle, so the block is positive
    // definite whenever the node has bonds in the subset; fall back to the
    // identity otherwise.
    if (std::abs(diag[i].determinant()) > 1e-30)
      diag_inv_[i] = diag[i].inverse();
    else
      diag_inv_[i] = Mat2::Identity();
  }
}

void QuadraticSystem::apply(const std::vector<Vec2>& in, std::vector<Vec2>& out) const {
  out.assign(n_, Vec2::Zero());
  for (const Term& t : terms_) {
    double s = t.coef * (in[t.i] - in[t.j]).dot(t.e);
    Vec2 f = s * t.e;
    out[t.i] += f;
    out[t.j] -= f;
  }
}

double QuadraticSystem::energy_of(const std::vector<Vec2>& u) const {
  std::vector<Vec2> au;
  apply(u, au);
  return 0.5 * dot(u, au) - dot(rhs_, u) + offset_;
}

MinimizeResult minimize_displacement(const LatticeComplex& cx, const SlipField& sigma,
                                     const SolveOptions& opts) {
  return minimize_displacement(cx, sigma, opts, all_bonds(cx));
}

MinimizeResult minimize_displacement(const LatticeComplex& cx, const SlipField& sigma,
                                     const SolveOptions& opts,
                                     const std::vector<std::uint32_t>& bond_subset) {
  QuadraticSystem sys(cx, sigma, bond_subset);
  const std::size_t n = sys.node_count();
  MinimizeResult res;
  res.u = DisplacementField(n);

  std::vector<Vec2> b = sys.rhs();
  // The consistent singular system has its right-hand side orthogonal to the
  // kernel; enforce this against rounding before iterating.
  auto kernel = kernel_basis(cx);
  project_out(b, kernel);

  double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    res.energy = sys.energy_offset();
    return res;
  }

  std::vector<Vec2>& x = res.u.values;
  std::vector<Vec2> r = b, z(n), p(n), ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = sys.diag_inverse()[i] * r[i];
  p = z;
  double rz = dot(r, z);
  const long max_iter = std::lround(opts.max_iter_factor * 2.0 * double(n)) + 16;
  double rel = 1.0;
  long it = 0;
  for (; it < max_iter; ++it) {
    double r_norm = std::sqrt(dot(r, r));
    rel = r_norm / b_norm;
    if (rel <= opts.tol) break;
    sys.apply(p, ap);
    double p_ap = dot(p, ap);
    if (!(p_ap > 0.0)) {
      // Search direction numerically in the kernel; whatever residual is
      // left must be kernel noise.
      project_out(r, kernel);
      rel = std::sqrt(dot(r, r)) / b_norm;
      break;
    }
    double alpha = rz / p_ap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    if ((it + 1) % 256 == 0) project_out(r, kernel);
    for (std::size_t i = 0; i < n; ++i) z[i] = sys.diag_inverse()[i] * r[i];
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.iterations = int(it);
  res.relative_residual = rel;
  res.energy = sys.energy_of(x);
  if (rel > opts.tol) {
    MinimizeResult best = res;
    throw SolveError("conjugate gradient iteration cap exceeded", std::move(best));
  }
  return res;
}

namespace {

// Best slip on one bond given the current displacement: the integer lattice
// value minimizing [(du - eps sigma) . e]^2 over |p|, |q| <= 2.
LatticeVector best_dangling_slip(const LatticeComplex& cx, const DisplacementField& u,
                                 const Bond& b) {
  Vec2 e = cx.node_position(b.j) - cx.node_position(b.i);
  double du_e = (u[b.j] - u[b.i]).dot(e);
  LatticeVector best{};
  double best_val = std::numeric_limits<double>::infinity();
  for (std::int64_t p = -2; p <= 2; ++p) {
    for (std::int64_t q = -2; q <= 2; ++q) {
      LatticeVector s{p, q};
      double r = du_e - cx.epsilon * s.embed().dot(e);
      double v = r * r;
      if (v < best_val - 1e-15 * (1.0 + best_val)) {
        best_val = v;
        best = s;
      }
    }
  }
  return best;
}

}  // namespace

FResult minimize_over_gauge_class(const SlipField& sigma, const LatticeComplex& cx,
                                  const SolveOptions& opts) {
  FResult out;
  out.slip = sigma;

  std::vector<std::uint32_t> dangling;
  for (std::uint32_t bi = 0; bi < cx.bonds.size(); ++bi)
    if (cx.bonds[bi].dangling) dangling.push_back(bi);

  out.minimize = minimize_displacement(cx, out.slip, opts);
  // Slips on dangling bonds do not alter any circulation; optimize them by
  // bounded enumeration interleaved with re-solves.
  for (int sweep = 0; sweep < 3 && !dangling.empty(); ++sweep) {
    bool changed = false;
    for (std::uint32_t bi : dangling) {
      const Bond& b = cx.bonds[bi];
      LatticeVector cur = out.slip.get(b.i, b.j);
      LatticeVector best = best_dangling_slip(cx, out.minimize.u, b);
      if (best != cur) {
        out.slip.set(b.i, b.j, best);
        changed = true;
      }
    }
    if (!changed) break;
    ++out.dangling_sweeps;
    out.minimize = minimize_displacement(cx, out.slip, opts);
  }
  out.value = out.minimize.energy;
  return out;
}

FResult compute_F_of_mu(const DislocationMeasure& mu, const LatticeComplex& cx,
                        const SolveOptions& opts) {
  if (!cx.edge_connected) throw Error("compute_F_of_mu: complex is not edge-connected");
  if (!cx.simply_connected) throw Error("compute_F_of_mu: complex is not simply connected");
  if (!check_mild_separation(mu, cx))
    throw Error("compute_F_of_mu: measure violates mild separation");
  SlipField sigma = representative_slip(mu, cx);
  return minimize_over_gauge_class(sigma, cx, opts);
}

}  // namespace dislat
