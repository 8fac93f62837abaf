#include "dislat/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace dislat {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double total_variation(const AtomicMeasure& mu) {
  double sum = 0.0;
  for (const Vec2& w : mu.weights) sum += w.norm();
  return sum;
}

namespace detail {

double min_cost_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                          const std::vector<double>& cost) {
  const int ns = int(supply.size()), nt = int(demand.size());
  if (ns == 0 || nt == 0) return 0.0;
  const double total = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double mass_tol = 1e-13 * std::max(1.0, total);

  // Node layout: 0 = super source, 1..ns = sources, ns+1..ns+nt = sinks,
  // ns+nt+1 = super sink.
  const int V = ns + nt + 2;
  const int S = 0, T = V - 1;
  std::vector<double> flow(std::size_t(ns) * nt, 0.0);  // source x sink
  std::vector<double> used_s(ns, 0.0), used_t(nt, 0.0);
  std::vector<double> pot(V, 0.0), dist(V);
  std::vector<int> parent(V);
  std::vector<char> done(V);

  auto c_at = [&](int i, int j) { return cost[std::size_t(i) * nt + j]; };

  double shipped = 0.0;
  const int max_rounds = 30 * (ns + nt) + 64;
  for (int round = 0; round < max_rounds; ++round) {
    if (shipped >= total - mass_tol) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    std::fill(parent.begin(), parent.end(), -1);
    dist[S] = 0.0;
    // Dense Dijkstra on the residual graph with Johnson potentials.
    for (;;) {
      int u = -1;
      double best = kInf;
      for (int v = 0; v < V; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u < 0) break;
      done[u] = 1;
      // Never relax finished nodes: with rounded reduced costs this both
      // keeps Dijkstra valid and rules out parent-pointer cycles.
      if (u == S) {
        for (int i = 0; i < ns; ++i)
          if (!done[1 + i] && supply[i] - used_s[i] > mass_tol) {
            double nd = dist[S] + pot[S] - pot[1 + i];
            if (nd < dist[1 + i]) {
              dist[1 + i] = nd;
              parent[1 + i] = S;
            }
          }
      } else if (u <= ns) {
        const int i = u - 1;
        for (int j = 0; j < nt; ++j) {
          if (done[1 + ns + j]) continue;
          double nd = dist[u] + c_at(i, j) + pot[u] - pot[1 + ns + j];
          if (nd < dist[1 + ns + j]) {
            dist[1 + ns + j] = nd;
            parent[1 + ns + j] = u;
          }
        }
      } else if (u < V - 1) {
        const int j = u - 1 - ns;
        if (!done[T] && demand[j] - used_t[j] > mass_tol) {
          double nd = dist[u] + pot[u] - pot[T];
          if (nd < dist[T]) {
            dist[T] = nd;
            parent[T] = u;
          }
        }
        for (int i = 0; i < ns; ++i)
          if (!done[1 + i] && flow[std::size_t(i) * nt + j] > mass_tol) {
            double nd = dist[u] - c_at(i, j) + pot[u] - pot[1 + i];
            if (nd < dist[1 + i]) {
              dist[1 + i] = nd;
              parent[1 + i] = u;
            }
          }
      }
    }
    if (!(dist[T] < kInf)) break;  // nothing reachable; remaining mass is zero
    for (int v = 0; v < V; ++v)
      if (dist[v] < kInf) pot[v] += dist[v];

    // Bottleneck along the augmenting path.
    double amount = total - shipped;
    int steps = 0;
    for (int v = T; v != S; v = parent[v]) {
      if (parent[v] < 0 || ++steps > V) throw Error("transportation path corrupted");
      int u = parent[v];
      if (u == S)
        amount = std::min(amount, supply[v - 1] - used_s[v - 1]);
      else if (v == T)
        amount = std::min(amount, demand[u - 1 - ns] - used_t[u - 1 - ns]);
      else if (u <= ns && v > ns)
        ;  // forward arc, uncapacitated
      else
        amount = std::min(amount, flow[std::size_t(v - 1) * nt + (u - 1 - ns)]);
    }
    if (!(amount > 0.0)) break;
    for (int v = T; v != S; v = parent[v]) {
      int u = parent[v];
      if (u == S)
        used_s[v - 1] += amount;
      else if (v == T)
        used_t[u - 1 - ns] += amount;
      else if (u <= ns && v > ns)
        flow[std::size_t(u - 1) * nt + (v - 1 - ns)] += amount;
      else
        flow[std::size_t(v - 1) * nt + (u - 1 - ns)] -= amount;
    }
    shipped += amount;
  }
  if (shipped < total - 1e-9 * std::max(1.0, total))
    throw Error("transportation solver failed to ship all mass");

  double value = 0.0;
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) value += flow[std::size_t(i) * nt + j] * c_at(i, j);
  return value;
}

namespace {

// Inner problem value at a fixed sup/Lipschitz split lambda = t, alpha = 1-t,
// through the dual transportation problem with metric-closure costs.
double inner_value_at(const std::vector<Vec2>& pts, const std::vector<double>& bdist,
                      const std::vector<double>& c, double t) {
  const std::size_t n = pts.size();
  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i] > 0.0) pos.push_back(int(i));
    if (c[i] < 0.0) neg.push_back(int(i));
  }
  auto cap = [&](int i) { return std::min(1.0 - t, t * bdist[std::size_t(i)]); };

  double sup_total = 0.0, dem_total = 0.0;
  for (int i : pos) sup_total += c[std::size_t(i)];
  for (int j : neg) dem_total -= c[std::size_t(j)];
  if (sup_total == 0.0 && dem_total == 0.0) return 0.0;

  const bool slack_sink = sup_total > dem_total;
  const bool slack_source = dem_total > sup_total;
  const int ns = int(pos.size()) + (slack_source ? 1 : 0);
  const int nt = int(neg.size()) + (slack_sink ? 1 : 0);

  std::vector<double> supply(ns), demand(nt);
  for (std::size_t k = 0; k < pos.size(); ++k) supply[k] = c[std::size_t(pos[k])];
  if (slack_source) supply[std::size_t(ns - 1)] = dem_total - sup_total;
  for (std::size_t k = 0; k < neg.size(); ++k) demand[k] = -c[std::size_t(neg[k])];
  if (slack_sink) demand[std::size_t(nt - 1)] = sup_total - dem_total;

  std::vector<double> cost(std::size_t(ns) * nt, 0.0);
  for (int a = 0; a < ns; ++a) {
    const bool a_slack = slack_source && a == ns - 1;
    for (int b = 0; b < nt; ++b) {
      const bool b_slack = slack_sink && b == nt - 1;
      double cc;
      if (a_slack && b_slack)
        cc = 0.0;
      else if (a_slack)
        cc = cap(neg[std::size_t(b)]);
      else if (b_slack)
        cc = cap(pos[std::size_t(a)]);
      else {
        int i = pos[std::size_t(a)], j = neg[std::size_t(b)];
        cc = std::min(t * (pts[std::size_t(i)] - pts[std::size_t(j)]).norm(),
                      cap(i) + cap(j));
      }
      cost[std::size_t(a) * nt + b] = cc;
    }
  }
  return min_cost_transport(supply, demand, cost);
}

// Concave 1-D maximization over [0,1]: coarse scan then golden section.
template <typename F>
double maximize_concave(F&& f, double* arg_best = nullptr) {
  const int grid = 20;
  double best = -kInf, tb = 0.5;
  for (int k = 0; k <= grid; ++k) {
    double t = double(k) / grid;
    double v = f(t);
    if (v > best) {
      best = v;
      tb = t;
    }
  }
  double lo = std::max(0.0, tb - 1.0 / grid), hi = std::min(1.0, tb + 1.0 / grid);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    }
  }
  double v = std::max(std::max(f1, f2), best);
  if (arg_best) *arg_best = 0.5 * (lo + hi);
  return v;
}

}  // namespace

double scalar_flat_norm(const std::vector<Vec2>& pts, const std::vector<double>& bdist,
                        const std::vector<double>& c) {
  bool any = false;
  for (double ci : c)
    if (ci != 0.0) any = true;
  if (!any) return 0.0;
  return maximize_concave([&](double t) { return inner_value_at(pts, bdist, c, t); });
}

}  // namespace detail

namespace {

struct Prepared {
  std::vector<Vec2> pts;
  std::vector<Vec2> w;
  std::vector<double> bdist;
};

Prepared prepare(const AtomicMeasure& mu) {
  mu.domain.validate();
  Prepared out;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weights[i].isZero(0.0)) continue;
    if (!mu.domain.contains_interior(mu.points[i]))
      throw Error("flat_norm: atom on or outside the domain boundary");
    double d = mu.domain.boundary_distance(mu.points[i]);
    if (!(d > 0.0)) throw Error("flat_norm: atom on the domain boundary");
    out.pts.push_back(mu.points[i]);
    out.w.push_back(mu.weights[i]);
    out.bdist.push_back(d);
  }
  return out;
}

// All weights parallel to a common direction?  Returns the direction.
bool common_direction(const std::vector<Vec2>& w, Vec2* dir) {
  Vec2 ref = Vec2::Zero();
  for (const Vec2& v : w)
    if (v.norm() > ref.norm()) ref = v;
  if (ref.isZero(0.0)) return false;
  ref.normalize();
  for (const Vec2& v : w) {
    if (std::abs(wedge(ref, v)) > 1e-13 * v.norm()) return false;
  }
  *dir = ref;
  return true;
}

double exact_direction_value(const Prepared& p, const Vec2& d) {
  std::vector<double> c(p.pts.size());
  for (std::size_t i = 0; i < p.pts.size(); ++i) c[i] = p.w[i].dot(d);
  return detail::scalar_flat_norm(p.pts, p.bdist, c);
}

FlatNormResult flat_norm_exact(const Prepared& p, int direction_samples) {
  FlatNormResult res;
  Vec2 dir;
  if (common_direction(p.w, &dir)) {
    res.value = exact_direction_value(p, dir);
  } else {
    // Angular grid plus golden refinement around the best sample.
    double best = 0.0, best_angle = 0.0;
    for (int k = 0; k < direction_samples; ++k) {
      double a = 2.0 * kPi * double(k) / double(direction_samples);
      double v = exact_direction_value(p, Vec2(std::cos(a), std::sin(a)));
      if (v > best) {
        best = v;
        best_angle = a;
      }
    }
    double half = 2.0 * kPi / double(direction_samples);
    double lo = best_angle - half, hi = best_angle + half;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    auto eval = [&](double a) { return exact_direction_value(p, Vec2(std::cos(a), std::sin(a))); };
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = eval(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = eval(x1);
      }
    }
    res.value = std::max({best, f1, f2});
  }
  res.lower = res.upper = res.value;
  res.is_estimate = false;
  return res;
}

// Uniform bucket grid for nearest-neighbor queries among the atoms.
struct PointGrid {
  double cell = 1.0;
  double x0 = 0.0, y0 = 0.0;
  int nx = 1, ny = 1;
  std::vector<std::vector<int>> buckets;

  explicit PointGrid(const std::vector<Vec2>& pts) {
    double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
    for (const Vec2& p : pts) {
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
      ymin = std::min(ymin, p.y());
      ymax = std::max(ymax, p.y());
    }
    double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    int target = std::max(1, int(std::sqrt(double(pts.size()))));
    cell = span / target;
    x0 = xmin;
    y0 = ymin;
    nx = int((xmax - xmin) / cell) + 1;
    ny = int((ymax - ymin) / cell) + 1;
    buckets.assign(std::size_t(nx) * ny, {});
    for (std::size_t i = 0; i < pts.size(); ++i) buckets[index(pts[i])].push_back(int(i));
  }

  std::size_t index(const Vec2& p) const {
    int cx = std::clamp(int((p.x() - x0) / cell), 0, nx - 1);
    int cy = std::clamp(int((p.y() - y0) / cell), 0, ny - 1);
    return std::size_t(cy) * nx + cx;
  }

  // Nearest point among `pts` passing the filter; expanding ring search.
  template <typename Filter>
  int nearest(const std::vector<Vec2>& pts, const Vec2& from, Filter&& keep) const {
    int cx = std::clamp(int((from.x() - x0) / cell), 0, nx - 1);
    int cy = std::clamp(int((from.y() - y0) / cell), 0, ny - 1);
    int best = -1;
    double best_d = kInf;
    for (int ring = 0; ring < std::max(nx, ny) + 1; ++ring) {
      if (best >= 0 && double(ring - 1) * cell > best_d) break;
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          int gx = cx + dx, gy = cy + dy;
          if (gx < 0 || gy < 0 || gx >= nx || gy >= ny) continue;
          for (int i : buckets[std::size_t(gy) * nx + gx]) {
            if (!keep(i)) continue;
            double d = (pts[std::size_t(i)] - from).norm();
            if (d < best_d) {
              best_d = d;
              best = i;
            }
          }
        }
      }
    }
    return best;
  }
};

// Certified lower bound from a feasible sign-matched test function:
// phi_i = sign(c_i) * min(1-lambda, lambda*r_i/2, lambda*bdist_i), where r_i
// is the distance to the nearest atom of different sign.  Pairwise
// feasibility follows from r being 1-Lipschitz and r_i <= |x_i - x_j| for
// opposite signs, so the assignment extends to an admissible function.
double estimate_lower_direction(const Prepared& p, const PointGrid& grid, const Vec2& d) {
  const std::size_t n = p.pts.size();
  std::vector<double> c(n);
  std::vector<int> sgn(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = p.w[i].dot(d);
    sgn[i] = c[i] > 0.0 ? 1 : (c[i] < 0.0 ? -1 : 0);
  }
  std::vector<double> r(n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    int j = grid.nearest(p.pts, p.pts[i], [&](int k) { return sgn[std::size_t(k)] != sgn[i]; });
    if (j >= 0) r[i] = (p.pts[std::size_t(j)] - p.pts[i]).norm();
  }
  // Concave piecewise-linear in the split parameter; coarse scan plus
  // ternary refinement.
  auto value = [&](double t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = std::min({1.0 - t, 0.5 * t * r[i], t * p.bdist[i]});
      sum += std::abs(c[i]) * m;
    }
    return sum;
  };
  double best = 0.0;
  const int grid_pts = 40;
  double tb = 0.5;
  for (int k = 0; k <= grid_pts; ++k) {
    double t = double(k) / grid_pts;
    double v = value(t);
    if (v > best) {
      best = v;
      tb = t;
    }
  }
  double lo = std::max(0.0, tb - 1.0 / grid_pts), hi = std::min(1.0, tb + 1.0 / grid_pts);
  for (int it = 0; it < 50; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (value(m1) < value(m2))
      lo = m1;
    else
      hi = m2;
  }
  return std::max(best, value(0.5 * (lo + hi)));
}

// Certified upper bound: pair atoms with exactly opposite weights, bound each
// dipole by |w| min(|x-y|, u(x)+u(y)) and each single by |w| u(x) with
// u = d/(1+d).
double estimate_upper(const Prepared& p, const PointGrid& grid) {
  const std::size_t n = p.pts.size();
  auto u_of = [&](std::size_t i) { return p.bdist[i] / (1.0 + p.bdist[i]); };

  std::unordered_map<std::uint64_t, std::vector<int>> groups;
  auto key_of = [](const Vec2& w) {
    std::uint64_t k[2];
    double v[2] = {w.x(), w.y()};
    std::memcpy(k, v, sizeof k);
    return k[0] * 1000003ULL ^ k[1];
  };
  for (std::size_t i = 0; i < n; ++i) groups[key_of(p.w[i])].push_back(int(i));

  std::vector<char> matched(n, 0);
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (matched[i]) continue;
    Vec2 opposite = -p.w[i];
    auto it = groups.find(key_of(opposite));
    int j = -1;
    if (it != groups.end()) {
      j = grid.nearest(p.pts, p.pts[i], [&](int k) {
        return !matched[std::size_t(k)] && std::size_t(k) != i &&
               p.w[std::size_t(k)].x() == opposite.x() && p.w[std::size_t(k)].y() == opposite.y();
      });
    }
    if (j >= 0) {
      matched[i] = matched[std::size_t(j)] = 1;
      double dij = (p.pts[i] - p.pts[std::size_t(j)]).norm();
      bound += p.w[i].norm() * std::min(dij, u_of(i) + u_of(std::size_t(j)));
    } else {
      matched[i] = 1;
      bound += p.w[i].norm() * u_of(i);
    }
  }
  return bound;
}

FlatNormResult flat_norm_estimate(const Prepared& p, int direction_samples) {
  PointGrid grid(p.pts);
  FlatNormResult res;
  res.is_estimate = true;
  Vec2 dir;
  if (common_direction(p.w, &dir)) {
    res.lower = estimate_lower_direction(p, grid, dir);
  } else {
    double best = 0.0;
    for (int k = 0; k < direction_samples; ++k) {
      double a = 2.0 * kPi * double(k) / double(direction_samples);
      best = std::max(best, estimate_lower_direction(p, grid, Vec2(std::cos(a), std::sin(a))));
    }
    res.lower = best;
  }
  res.upper = std::max(estimate_upper(p, grid), res.lower);
  res.value = res.lower;
  return res;
}

}  // namespace

FlatNormResult flat_norm(const AtomicMeasure& mu, const FlatNormOptions& opts) {
  Prepared p = prepare(mu);
  if (p.pts.empty()) return {};
  if (p.pts.size() <= opts.exact_atom_cap) return flat_norm_exact(p, opts.direction_samples);
  return flat_norm_estimate(p, opts.direction_samples);
}

}  // namespace dislat
