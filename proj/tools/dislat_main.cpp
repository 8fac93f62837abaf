#include "dislat/experiments.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <exception>

int main(int argc, char** argv) {
  CLI::App app{"dislat: edge dislocations on a triangular lattice"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config JSON")->required();
    sub->add_option("--out", out_path, "output path (overrides config)");
    sub->add_option("--threads", threads, "worker threads for the epsilon sweep");
  };

  CLI::App* scaling = app.add_subcommand("scaling", "energy scaling sweep over epsilon");
  CLI::App* counter = app.add_subcommand("counterexamples", "zero-energy degeneracy report");
  CLI::App* flat = app.add_subcommand("flatnorm", "flat convergence diagnostic sweep");
  CLI::App* audit =
      app.add_subcommand("constraint-audit", "volume-constraint audit of the recovery slip");
  for (CLI::App* sub : {scaling, counter, flat, audit}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    dislat::ExperimentConfig cfg = dislat::load_config(config_path);
    if (app.got_subcommand(scaling)) cfg.experiment = "scaling";
    if (app.got_subcommand(counter)) cfg.experiment = "counterexamples";
    if (app.got_subcommand(flat)) cfg.experiment = "flatnorm";
    if (app.got_subcommand(audit)) cfg.experiment = "constraint_audit";
    if (!out_path.empty()) cfg.output_path = out_path;
    if (threads > 0) cfg.threads = threads;
    dislat::run_experiment(cfg);
    std::printf("wrote %s\n", cfg.output_path.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
