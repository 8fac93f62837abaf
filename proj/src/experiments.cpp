#include "dislat/experiments.hpp"

#include "json.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace dislat {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Fn>
void parallel_indexed(std::size_t n, int threads, Fn&& fn) {
  int workers = std::min<int>(std::max(threads, 1), int(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

AtomicMeasure measure_over_eps(const LatticeComplex& cx, const DislocationMeasure& mu) {
  AtomicMeasure out;
  out.domain = cx.domain;
  for (const auto& [tid, w] : mu.atoms)
    out.add(LatticeComplex::barycenter(tid, cx.epsilon), w.embed());
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  domain.validate();
  if (epsilons.empty()) throw Error("config: epsilons must be nonempty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw Error("config: epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw Error("config: epsilons must be strictly decreasing");
  }
  for (const Dislocation& d : dislocations)
    if (!domain.contains_interior(d.x))
      throw Error("config: dislocation position outside the domain");
  if (experiment != "scaling" && experiment != "counterexamples" && experiment != "flatnorm" &&
      experiment != "constraint_audit")
    throw Error("config: unknown experiment '" + experiment + "'");
  if (threads < 1) throw Error("config: threads must be >= 1");
}

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  if (!j.contains("domain")) throw Error("config: missing domain");
  const json& dom = j["domain"];
  std::string type = dom.value("type", "");
  if (type == "square") {
    cfg.domain = ConvexPolygon::square(dom.at("half_width").get<double>());
  } else if (type == "polygon") {
    for (const auto& v : dom.at("vertices"))
      cfg.domain.vertices.push_back(Vec2(v.at(0).get<double>(), v.at(1).get<double>()));
  } else {
    throw Error("config: domain.type must be 'square' or 'polygon'");
  }
  cfg.epsilons = j.at("epsilons").get<std::vector<double>>();
  if (j.contains("dislocations")) {
    for (const auto& d : j["dislocations"]) {
      Dislocation dd;
      dd.b = LatticeVector{d.at("b").at(0).get<std::int64_t>(), d.at("b").at(1).get<std::int64_t>()};
      dd.x = Vec2(d.at("x").at(0).get<double>(), d.at("x").at(1).get<double>());
      cfg.dislocations.push_back(dd);
    }
  }
  if (j.contains("solver")) {
    cfg.solver.tol = j["solver"].value("tol", 1e-10);
    cfg.solver.max_iter_factor = j["solver"].value("max_iter_factor", 50.0);
  }
  cfg.experiment = j.value("experiment", "scaling");
  cfg.output_path = j.value("output", "out.csv");
  cfg.threads = j.value("threads", 1);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_json(text);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  json dom;
  dom["type"] = "polygon";
  for (const Vec2& v : cfg.domain.vertices) dom["vertices"].push_back({v.x(), v.y()});
  j["domain"] = dom;
  j["epsilons"] = cfg.epsilons;
  j["dislocations"] = json::array();
  for (const Dislocation& d : cfg.dislocations)
    j["dislocations"].push_back({{"b", {d.b.p, d.b.q}}, {"x", {d.x.x(), d.x.y()}}});
  j["solver"] = {{"tol", cfg.solver.tol}, {"max_iter_factor", cfg.solver.max_iter_factor}};
  j["experiment"] = cfg.experiment;
  j["output"] = cfg.output_path;
  j["threads"] = cfg.threads;
  return j.dump(2);
}

DislocationMeasure snap_measure(const LatticeComplex& cx,
                                const std::vector<Dislocation>& dislocations) {
  DislocationMeasure mu;
  mu.epsilon_scaled = true;
  for (const Dislocation& d : dislocations) mu.add(snap_to_barycenter(d.x, cx), d.b);
  return mu;
}

SlipField make_counter_ms_slip(const LatticeComplex& cx) {
  SlipField sigma;
  const LatticeVector sqrt3_e2{-1, 2};
  for (const Bond& b : cx.bonds)
    if (b.dir == 0) sigma.set(b.i, b.j, sqrt3_e2);
  return sigma;
}

std::pair<DisplacementField, SlipField> make_crack_pair(const LatticeComplex& cx, int sign) {
  if (sign != 1 && sign != -1) throw Error("crack sign must be +1 or -1");
  DisplacementField u(cx.node_count());
  const Vec2 step = double(sign) * cx.epsilon * lattice_nu().embed();
  auto lower = [&](std::uint32_t i) { return cx.nodes[i].b <= 0; };
  for (std::uint32_t i = 0; i < cx.node_count(); ++i)
    if (lower(i)) u[i] = step;
  SlipField sigma;
  for (const Bond& b : cx.bonds) {
    int d = int(lower(b.j)) - int(lower(b.i));
    if (d != 0) sigma.set(b.i, b.j, (sign * d) * lattice_nu());
  }
  return {std::move(u), std::move(sigma)};
}

std::pair<DisplacementField, SlipField> make_dilation_pair(const LatticeComplex& cx,
                                                           std::int64_t lambda) {
  DisplacementField u(cx.node_count());
  for (std::uint32_t i = 0; i < cx.node_count(); ++i)
    u[i] = double(lambda) * cx.node_position(i);
  SlipField sigma;
  for (const Bond& b : cx.bonds) sigma.set(b.i, b.j, lambda * cx.bond_step(b.i, b.j));
  return {std::move(u), std::move(sigma)};
}

CondliAudit condli_audit(const LatticeComplex& cx, const SlipField& sigma) {
  CondliAudit audit;
  for (std::uint32_t t = 0; t < cx.triangle_count(); ++t) {
    if (!slip_circulation(cx, sigma, t).is_zero()) {
      ++audit.charged;
      continue;
    }
    ++audit.checked;
    if (check_volume_constraint(cx, sigma, t)) ++audit.satisfied;
  }
  return audit;
}

const std::vector<std::array<LatticeVector, 3>>& condli_feasible_slips(Orientation orient,
                                                                       int bound) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<std::array<LatticeVector, 3>>> cache;
  std::scoped_lock lock(mutex);
  auto key = std::make_pair(int(orient), bound);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  // Counterclockwise vertex steps of the reference triangle.
  LatticeVector v[3];
  if (orient == Orientation::Up) {
    v[0] = {0, 0};
    v[1] = {1, 0};
    v[2] = {0, 1};
  } else {
    v[0] = {0, 0};
    v[1] = {1, -1};
    v[2] = {1, 0};
  }
  // Edge slips s01, s12, s20 in cyclic order; the constraint for the triple
  // (i,j,k) reads sigma(i,k) ^ (j-i) - sigma(i,j) ^ (k-i) = 0.
  auto ok = [&](const std::array<LatticeVector, 3>& s) {
    for (int r = 0; r < 3; ++r) {
      LatticeVector ji = v[(r + 1) % 3] - v[r];
      LatticeVector ki = v[(r + 2) % 3] - v[r];
      LatticeVector s_ij = s[std::size_t(r)];
      LatticeVector s_ik = -s[std::size_t((r + 2) % 3)];
      if (wedge_z(s_ik, ji) - wedge_z(s_ij, ki) != 0) return false;
    }
    return true;
  };
  std::vector<std::array<LatticeVector, 3>> feasible;
  const std::int64_t B = bound;
  std::array<LatticeVector, 3> s;
  for (s[0].p = -B; s[0].p <= B; ++s[0].p)
    for (s[0].q = -B; s[0].q <= B; ++s[0].q)
      for (s[1].p = -B; s[1].p <= B; ++s[1].p)
        for (s[1].q = -B; s[1].q <= B; ++s[1].q)
          for (s[2].p = -B; s[2].p <= B; ++s[2].p)
            for (s[2].q = -B; s[2].q <= B; ++s[2].q)
              if (ok(s)) feasible.push_back(s);
  auto [pos, inserted] = cache.emplace(key, std::move(feasible));
  (void)inserted;
  return pos->second;
}

double constrained_min_triangle_energy(const LatticeComplex& cx, const DisplacementField& u,
                                       std::uint32_t tri_idx, int bound) {
  const auto& vs = cx.tri_nodes[tri_idx];
  Vec2 e[3], du[3];
  for (int r = 0; r < 3; ++r) {
    std::uint32_t i = vs[std::size_t(r)], j = vs[std::size_t((r + 1) % 3)];
    e[r] = cx.node_position(j) - cx.node_position(i);
    du[r] = u[j] - u[i];
  }
  const double inv_eps2 = 1.0 / (cx.epsilon * cx.epsilon);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : condli_feasible_slips(cx.triangles[tri_idx].orient, bound)) {
    double sum = 0.0;
    for (int r = 0; r < 3; ++r) {
      double res = (du[r] - cx.epsilon * s[std::size_t(r)].embed()).dot(e[r]);
      sum += res * res;
    }
    best = std::min(best, sum * inv_eps2);
  }
  return best;
}

std::vector<ScalingRow> run_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ScalingRow> rows(cfg.epsilons.size());
  std::vector<BurgersVector> bs;
  for (const Dislocation& d : cfg.dislocations) bs.push_back(d.b);
  const double predicted = predicted_limit(bs);

  parallel_indexed(cfg.epsilons.size(), cfg.threads, [&](std::size_t k) {
    ScalingRow& row = rows[k];
    row.epsilon = cfg.epsilons[k];
    row.predicted = predicted;
    const double t0 = now_seconds();
    try {
      LatticeComplex cx = build_lattice(cfg.domain, row.epsilon);
      DislocationMeasure mu = snap_measure(cx, cfg.dislocations);
      row.ms_ok = check_mild_separation(mu, cx);
      AtomicMeasure nu = measure_over_eps(cx, mu);
      row.tv = total_variation(nu);
      AtomicMeasure diff = nu;
      for (const Dislocation& d : cfg.dislocations) diff.add(d.x, -d.b.embed());
      row.flat_error = flat_norm(diff).value;
      if (cfg.dislocations.empty()) {
        row.F = 0.0;
        row.F_normalized = 0.0;
      } else {
        FResult f = compute_F_of_mu(mu, cx, cfg.solver);
        row.F = f.value;
        double denom = row.epsilon * row.epsilon * std::abs(std::log(row.epsilon));
        row.F_normalized = row.F / denom;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.wall_time = now_seconds() - t0;
  });
  return rows;
}

std::vector<FlatRow> run_flatnorm(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<FlatRow> rows(cfg.epsilons.size());
  parallel_indexed(cfg.epsilons.size(), cfg.threads, [&](std::size_t k) {
    FlatRow& row = rows[k];
    row.epsilon = cfg.epsilons[k];
    try {
      LatticeComplex cx = build_lattice(cfg.domain, row.epsilon);
      DislocationMeasure mu = snap_measure(cx, cfg.dislocations);
      AtomicMeasure nu = measure_over_eps(cx, mu);
      row.tv_over_eps = total_variation(nu);
      AtomicMeasure diff = nu;
      for (const Dislocation& d : cfg.dislocations) diff.add(d.x, -d.b.embed());
      FlatNormResult fn = flat_norm(diff);
      row.flat_error = fn.value;
      row.is_estimate = fn.is_estimate;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

namespace {

CounterExampleReport::Degenerate degenerate_report(
    const ExperimentConfig& cfg, int kind /*0,1 = crack -,+ ; 2 = dilation*/) {
  CounterExampleReport::Degenerate rep;
  for (double eps : cfg.epsilons) {
    LatticeComplex cx = build_lattice(cfg.domain, eps);
    auto [u, sigma] = kind == 2 ? make_dilation_pair(cx, 1)
                                : make_crack_pair(cx, kind == 1 ? 1 : -1);
    rep.epsilons.push_back(eps);
    rep.energies.push_back(energy(cx, u, sigma));
    DislocationMeasure mu = dislocation_measure(cx, sigma);
    rep.ms_ok = rep.ms_ok && check_mild_separation(mu, cx);
  }
  // Constrained per-triangle scan at the coarsest lattice.
  const double eps = cfg.epsilons.front();
  rep.condli_epsilon = eps;
  LatticeComplex cx = build_lattice(cfg.domain, eps);
  auto [u, sigma] = kind == 2 ? make_dilation_pair(cx, 1)
                              : make_crack_pair(cx, kind == 1 ? 1 : -1);
  double min_active = std::numeric_limits<double>::infinity();
  double min_overall = std::numeric_limits<double>::infinity();
  for (std::uint32_t t = 0; t < cx.triangle_count(); ++t) {
    if (!slip_circulation(cx, sigma, t).is_zero()) continue;  // dislocation-free only
    double m = constrained_min_triangle_energy(cx, u, t, 3);
    min_overall = std::min(min_overall, m);
    const auto& vs = cx.tri_nodes[t];
    bool active = false;
    for (int r = 0; r < 3; ++r) {
      if ((u[vs[std::size_t((r + 1) % 3)]] - u[vs[std::size_t(r)]]).norm() > 0.0) active = true;
    }
    if (active) {
      ++rep.active_triangles;
      min_active = std::min(min_active, m);
    }
  }
  rep.condli_min_active = std::isfinite(min_active) ? min_active : 0.0;
  rep.condli_min_overall = std::isfinite(min_overall) ? min_overall : 0.0;
  return rep;
}

}  // namespace

CounterExampleReport run_counterexamples(const ExperimentConfig& cfg) {
  cfg.validate();
  CounterExampleReport report;

  std::vector<double> log_eps, log_flat;
  for (double eps : cfg.epsilons) {
    LatticeComplex cx = build_lattice(cfg.domain, eps);
    SlipField sigma = make_counter_ms_slip(cx);
    DisplacementField u(cx.node_count());
    CounterExampleReport::CmsRow row;
    row.epsilon = eps;
    row.energy = energy(cx, u, sigma);
    DislocationMeasure mu = dislocation_measure(cx, sigma);
    report.cms_ms_ok = check_mild_separation(mu, cx) && report.cms_ms_ok;
    AtomicMeasure nu = measure_over_eps(cx, mu);
    row.tv_over_eps = total_variation(nu);
    FlatNormResult fn = flat_norm(nu);
    row.flat_over_eps = fn.value;
    row.flat_is_estimate = fn.is_estimate;
    report.counter_ms.push_back(row);
    log_eps.push_back(std::log(eps));
    log_flat.push_back(std::log(std::max(row.flat_over_eps, 1e-300)));
  }
  report.cms_flat_growth_exponent = regression_slope(log_eps, log_flat);

  report.crack_minus = degenerate_report(cfg, 0);
  report.crack_plus = degenerate_report(cfg, 1);
  report.dilation = degenerate_report(cfg, 2);
  return report;
}

std::string counterexamples_to_json(const CounterExampleReport& report) {
  json j;
  json rows = json::array();
  for (const auto& r : report.counter_ms)
    rows.push_back({{"epsilon", r.epsilon},
                    {"energy", r.energy},
                    {"tv_over_eps", r.tv_over_eps},
                    {"flat_over_eps", r.flat_over_eps},
                    {"flat_is_estimate", r.flat_is_estimate}});
  j["counter_ms"] = {{"rows", rows},
                     {"ms_ok", report.cms_ms_ok},
                     {"flat_growth_exponent", report.cms_flat_growth_exponent}};
  auto degen = [](const CounterExampleReport::Degenerate& d) {
    return json{{"epsilons", d.epsilons},
                {"energies", d.energies},
                {"ms_ok", d.ms_ok},
                {"condli", {{"epsilon", d.condli_epsilon},
                            {"active_triangles", d.active_triangles},
                            {"min_active", d.condli_min_active},
                            {"min_overall", d.condli_min_overall}}}};
  };
  j["crack_minus"] = degen(report.crack_minus);
  j["crack_plus"] = degen(report.crack_plus);
  j["dilation"] = degen(report.dilation);
  return j.dump(2);
}

std::vector<ConstraintAuditRow> run_constraint_audit(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ConstraintAuditRow> rows(cfg.epsilons.size());
  parallel_indexed(cfg.epsilons.size(), cfg.threads, [&](std::size_t k) {
    ConstraintAuditRow& row = rows[k];
    row.epsilon = cfg.epsilons[k];
    try {
      LatticeComplex cx = build_lattice(cfg.domain, row.epsilon);
      DislocationMeasure mu = snap_measure(cx, cfg.dislocations);
      SlipField sigma = representative_slip(mu, cx);
      CondliAudit audit = condli_audit(cx, sigma);
      row.triangles = cx.triangle_count();
      row.charged = audit.charged;
      row.condli_ok = audit.satisfied;
      row.fraction = audit.fraction();
      FResult f = minimize_over_gauge_class(sigma, cx, cfg.solver);
      row.F = f.value;
      double denom = row.epsilon * row.epsilon * std::abs(std::log(row.epsilon));
      row.F_normalized = cfg.dislocations.empty() ? 0.0 : row.F / denom;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

}  // namespace

void write_scaling_csv(const std::string& path, const std::vector<ScalingRow>& rows) {
  std::string text = "epsilon,F,F_normalized,predicted,flat_error,tv,ms_ok,wall_time,error\n";
  for (const ScalingRow& r : rows) {
    text += fmt_double(r.epsilon) + "," + fmt_double(r.F) + "," + fmt_double(r.F_normalized) +
            "," + fmt_double(r.predicted) + "," + fmt_double(r.flat_error) + "," +
            fmt_double(r.tv) + "," + (r.ms_ok ? "1" : "0") + "," + fmt_double(r.wall_time) + "," +
            r.error + "\n";
  }
  write_file(path, text);
}

void write_flat_csv(const std::string& path, const std::vector<FlatRow>& rows) {
  std::string text = "epsilon,flat_error,tv_over_eps,is_estimate,error\n";
  for (const FlatRow& r : rows) {
    text += fmt_double(r.epsilon) + "," + fmt_double(r.flat_error) + "," +
            fmt_double(r.tv_over_eps) + "," + (r.is_estimate ? "1" : "0") + "," + r.error + "\n";
  }
  write_file(path, text);
}

void write_audit_csv(const std::string& path, const std::vector<ConstraintAuditRow>& rows) {
  std::string text = "epsilon,triangles,charged,condli_ok,fraction,F,F_normalized,error\n";
  for (const ConstraintAuditRow& r : rows) {
    text += fmt_double(r.epsilon) + "," + std::to_string(r.triangles) + "," +
            std::to_string(r.charged) + "," + std::to_string(r.condli_ok) + "," +
            fmt_double(r.fraction) + "," + fmt_double(r.F) + "," + fmt_double(r.F_normalized) +
            "," + r.error + "\n";
  }
  write_file(path, text);
}

void run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  write_file(cfg.output_path + ".config.json", config_to_json(cfg));
  if (cfg.experiment == "scaling") {
    write_scaling_csv(cfg.output_path, run_scaling(cfg));
  } else if (cfg.experiment == "flatnorm") {
    write_flat_csv(cfg.output_path, run_flatnorm(cfg));
  } else if (cfg.experiment == "counterexamples") {
    write_file(cfg.output_path, counterexamples_to_json(run_counterexamples(cfg)));
  } else {
    write_audit_csv(cfg.output_path, run_constraint_audit(cfg));
  }
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("regression needs >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("regression needs distinct x values");
  return sxy / sxx;
}

}  // namespace dislat
