#pragma once

#include "dislat/measures.hpp"
#include "dislat/solver.hpp"

#include <string>
#include <vector>

namespace dislat {

struct ExperimentConfig {
  ConvexPolygon domain;
  std::vector<double> epsilons;  // strictly decreasing
  std::vector<Dislocation> dislocations;
  SolveOptions solver;
  std::string experiment = "scaling";  // scaling | counterexamples | flatnorm | constraint_audit
  std::string output_path = "out.csv";
  int threads = 1;

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

// mu = sum_k eps b_k at the snapped barycenter triangles.
DislocationMeasure snap_measure(const LatticeComplex& cx,
                                const std::vector<Dislocation>& dislocations);

// ---------------------------------------------------------------------------
// Degenerate zero-energy configurations.

// Slip sqrt(3) e2 on every +e1 bond (lattice value (-1, 2)), zero elsewhere;
// with u = 0 the energy vanishes while every triangle carries a dislocation.
SlipField make_counter_ms_slip(const LatticeComplex& cx);

// Microscopic crack: u = sign * eps * nu below the x-axis, zero above, with
// the matching slip du; sign = -1 opens a crack, +1 interpenetrates.
std::pair<DisplacementField, SlipField> make_crack_pair(const LatticeComplex& cx, int sign);

// Integer dilation: u = lambda * position with slip lambda * (j - i).
std::pair<DisplacementField, SlipField> make_dilation_pair(const LatticeComplex& cx,
                                                           std::int64_t lambda);

// ---------------------------------------------------------------------------
// Volume-constraint audits.

struct CondliAudit {
  std::size_t charged = 0;
  std::size_t checked = 0;    // dislocation-free triangles
  std::size_t satisfied = 0;  // of which satisfy the constraint
  double fraction() const { return checked == 0 ? 1.0 : double(satisfied) / double(checked); }
};

CondliAudit condli_audit(const LatticeComplex& cx, const SlipField& sigma);

// Slip triples on one triangle's edges, each component in [-bound, bound],
// satisfying the volume constraint; cached per orientation.
const std::vector<std::array<LatticeVector, 3>>& condli_feasible_slips(Orientation orient,
                                                                       int bound);

// Minimum localized energy of the triangle over constraint-feasible integer
// slips with |p|, |q| <= bound, at the given displacement.
double constrained_min_triangle_energy(const LatticeComplex& cx, const DisplacementField& u,
                                       std::uint32_t tri_idx, int bound);

// ---------------------------------------------------------------------------
// Experiment drivers.

struct ScalingRow {
  double epsilon = 0.0;
  double F = 0.0;
  double F_normalized = 0.0;
  double predicted = 0.0;
  double flat_error = 0.0;
  double tv = 0.0;
  bool ms_ok = false;
  double wall_time = 0.0;
  std::string error;
};

std::vector<ScalingRow> run_scaling(const ExperimentConfig& cfg);

struct FlatRow {
  double epsilon = 0.0;
  double flat_error = 0.0;
  double tv_over_eps = 0.0;
  bool is_estimate = false;
  std::string error;
};

std::vector<FlatRow> run_flatnorm(const ExperimentConfig& cfg);

struct CounterExampleReport {
  struct CmsRow {
    double epsilon = 0.0;
    double energy = 0.0;
    double tv_over_eps = 0.0;
    double flat_over_eps = 0.0;
    bool flat_is_estimate = false;
  };
  std::vector<CmsRow> counter_ms;
  bool cms_ms_ok = true;
  double cms_flat_growth_exponent = 0.0;

  struct Degenerate {
    std::vector<double> epsilons;
    std::vector<double> energies;
    bool ms_ok = true;
    double condli_epsilon = 0.0;       // lattice used for the constrained scan
    std::size_t active_triangles = 0;  // triangles with nonzero du on an edge
    double condli_min_active = 0.0;    // min constrained energy over active ones
    double condli_min_overall = 0.0;   // min over all dislocation-free triangles
  };
  Degenerate crack_minus, crack_plus, dilation;
};

CounterExampleReport run_counterexamples(const ExperimentConfig& cfg);
std::string counterexamples_to_json(const CounterExampleReport& report);

struct ConstraintAuditRow {
  double epsilon = 0.0;
  std::size_t triangles = 0;
  std::size_t charged = 0;
  std::size_t condli_ok = 0;
  double fraction = 0.0;
  double F = 0.0;
  double F_normalized = 0.0;
  std::string error;
};

std::vector<ConstraintAuditRow> run_constraint_audit(const ExperimentConfig& cfg);

// Runs the configured experiment and writes its output file plus a JSON
// sidecar of the resolved config at <output>.config.json.
void run_experiment(const ExperimentConfig& cfg);

void write_scaling_csv(const std::string& path, const std::vector<ScalingRow>& rows);
void write_flat_csv(const std::string& path, const std::vector<FlatRow>& rows);
void write_audit_csv(const std::string& path, const std::vector<ConstraintAuditRow>& rows);

// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dislat
