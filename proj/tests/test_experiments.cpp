#include "dislat/experiments.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace dislat;
using namespace dislat::testing;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.domain = ConvexPolygon::square(1.0);
  cfg.epsilons = {0.25, 0.125};
  cfg.dislocations = {{lattice_e1(), Vec2(0.0, 0.0)}};
  cfg.experiment = "scaling";
  cfg.output_path = "/tmp/dislat_test_scaling.csv";
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config json round trip and validation") {
  ExperimentConfig cfg = small_config();
  ExperimentConfig back = parse_config_json(config_to_json(cfg));
  CHECK(back.epsilons == cfg.epsilons);
  REQUIRE(back.dislocations.size() == 1);
  CHECK(back.dislocations[0].b == cfg.dislocations[0].b);
  CHECK(back.experiment == cfg.experiment);

  ExperimentConfig bad = cfg;
  bad.epsilons = {0.125, 0.25};  // increasing
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.dislocations[0].x = Vec2(3.0, 0.0);
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.experiment = "nonsense";
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(parse_config_json("{ not json"), Error);
}

TEST_CASE("counter-example report: exact zeros and diverging measures") {
  ExperimentConfig cfg = small_config();
  cfg.epsilons = {0.25, 0.125, 0.0625};
  CounterExampleReport rep = run_counterexamples(cfg);

  REQUIRE(rep.counter_ms.size() == 3);
  for (const auto& row : rep.counter_ms) {
    CHECK(std::abs(row.energy) <= 1e-12);
    double expected_tv = 16.0 / (row.epsilon * row.epsilon);
    CHECK(std::abs(row.tv_over_eps / expected_tv - 1.0) < 0.2);
  }
  CHECK_FALSE(rep.cms_ms_ok);
  CHECK(rep.cms_flat_growth_exponent == doctest::Approx(-1.0).epsilon(0.15));

  for (const auto* degen : {&rep.crack_minus, &rep.crack_plus, &rep.dilation}) {
    for (double e : degen->energies) CHECK(std::abs(e) <= 1e-12);
    CHECK(degen->ms_ok);  // their measures are empty
  }
  // Constrained minima: strictly positive wherever the displacement acts.
  CHECK(rep.dilation.condli_min_overall > 0.0);
  CHECK(rep.crack_minus.condli_min_active > 0.0);
  CHECK(rep.crack_minus.condli_min_overall == 0.0);
  CHECK(rep.crack_plus.condli_min_active > 0.0);
  CHECK(rep.crack_minus.active_triangles > 0);

  // JSON emission stays parseable.
  std::string text = counterexamples_to_json(rep);
  CHECK(text.find("counter_ms") != std::string::npos);
}

TEST_CASE("volume-constraint audit of slips") {
  const double eps = 1.0 / 32.0;
  LatticeComplex cx = build_lattice(ConvexPolygon::square(1.0), eps);

  CondliAudit zero = condli_audit(cx, SlipField{});
  CHECK(zero.fraction() == 1.0);
  CHECK(zero.charged == 0);

  auto [u, dil] = make_dilation_pair(cx, 1);
  (void)u;
  CondliAudit d = condli_audit(cx, dil);
  CHECK(d.fraction() == 0.0);

  DislocationMeasure mu = snap_measure(cx, {{lattice_e1(), Vec2(0.0, 0.0)}});
  SlipField sigma = representative_slip(mu, cx);
  CondliAudit r = condli_audit(cx, sigma);
  CHECK(r.charged == 1);
  CHECK(r.checked == cx.triangle_count() - 1);
  CHECK(r.fraction() == 1.0);  // recovery slips satisfy the constraint
}

TEST_CASE("constraint audit runner") {
  ExperimentConfig cfg = small_config();
  cfg.experiment = "constraint_audit";
  auto rows = run_constraint_audit(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.error.empty());
    CHECK(row.charged == 1);
    CHECK(row.fraction == 1.0);
    CHECK(row.F > 0.0);
  }
}

TEST_CASE("scaling runner emits consistent rows") {
  ExperimentConfig cfg = small_config();
  auto rows = run_scaling(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.error.empty());
    CHECK(row.ms_ok);
    CHECK(row.F > 0.0);
    CHECK(row.tv == doctest::Approx(1.0));
    CHECK(row.flat_error <= 2.0 * row.epsilon);
    CHECK(row.predicted == doctest::Approx(0.5 * kSqrt3 * phi(lattice_e1())));
  }
  CHECK(rows[1].flat_error <= rows[0].flat_error + 1e-12);
}

TEST_CASE("empty dislocation list gives zero energies") {
  ExperimentConfig cfg = small_config();
  cfg.dislocations.clear();
  auto rows = run_scaling(cfg);
  for (const auto& row : rows) {
    CHECK(row.error.empty());
    CHECK(row.F == 0.0);
    CHECK(row.flat_error == 0.0);
  }
}

TEST_CASE("experiments reproduce bit-identically from their sidecar") {
  ExperimentConfig cfg = small_config();
  cfg.threads = 2;
  run_experiment(cfg);
  std::string first = slurp(cfg.output_path);

  ExperimentConfig again = load_config(cfg.output_path + ".config.json");
  again.output_path = "/tmp/dislat_test_scaling2.csv";
  run_experiment(again);
  std::string second = slurp(again.output_path);

  // All columns except wall_time must agree exactly.
  auto strip_wall = [](const std::string& text) {
    std::stringstream in(text), out;
    std::string line;
    while (std::getline(in, line)) {
      std::size_t last = line.rfind(',');
      std::size_t prev = line.rfind(',', last - 1);
      out << line.substr(0, prev) << line.substr(last) << "\n";
    }
    return out.str();
  };
  CHECK(strip_wall(first) == strip_wall(second));
}

TEST_CASE("flatnorm runner tracks the snapping error") {
  ExperimentConfig cfg = small_config();
  cfg.experiment = "flatnorm";
  auto rows = run_flatnorm(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.error.empty());
    CHECK(row.flat_error <= 2.0 * row.epsilon);
    CHECK_FALSE(row.is_estimate);
  }
  CHECK(rows[1].flat_error <= rows[0].flat_error + 1e-12);
}

TEST_CASE("dipole scaling approaches twice the single-dislocation limit") {
  ExperimentConfig cfg;
  cfg.domain = ConvexPolygon::square(1.0);
  cfg.epsilons = {1.0 / 8.0, 1.0 / 16.0};
  cfg.dislocations = {{lattice_e1(), Vec2(-0.25, -0.22)}, {-lattice_e1(), Vec2(0.25, 0.25)}};
  auto rows = run_scaling(cfg);
  REQUIRE(rows.size() == 2);
  const double limit = 2.0 * 0.5 * kSqrt3 * phi(lattice_e1());
  for (const auto& row : rows) {
    CHECK(row.error.empty());
    CHECK(row.ms_ok);
    CHECK(row.predicted == doctest::Approx(limit));
    CHECK(row.tv == doctest::Approx(2.0));
  }
  double finest = rows.back().F_normalized;
  CHECK(finest >= 0.5 * limit);
  CHECK(finest <= 2.0 * limit);
}
