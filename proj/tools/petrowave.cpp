// Command-line front door for the simulation laboratory.
//
//   petrowave check    --config exp.json [--output DIR]
//   petrowave simulate --config exp.json [--output DIR] [--force]
//   petrowave envelope --config exp.json [--output DIR]
//   petrowave fit      --config exp.json [--output DIR]
//   petrowave sweep    --config exp.json [--output DIR] [--force] [--jobs N]
//
// Exit codes: 0 ok, 2 config error, 3 hypothesis failure, 4 divergence,
// 5 unsupported branch, 6 dominance failure.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "petrowave/petrowave.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string output_override;
  bool force = false;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--output", opt.output_override,
                  "output directory (overrides the config's output_dir)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral-Galerkin laboratory for the damped plate/wave system"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* check = app.add_subcommand("check", "verify hypotheses");
  add_common(check, opt);
  CLI::App* simulate = app.add_subcommand("simulate", "run the solver");
  add_common(simulate, opt);
  simulate->add_flag("--force", opt.force,
                     "simulate even when hypotheses fail");
  CLI::App* envelope =
      app.add_subcommand("envelope", "evaluate the predicted decay envelope");
  add_common(envelope, opt);
  CLI::App* fit = app.add_subcommand("fit", "fit decay rates to a trace");
  add_common(fit, opt);
  CLI::App* sweep = app.add_subcommand("sweep", "run a batch of experiments");
  add_common(sweep, opt);
  sweep->add_flag("--force", opt.force,
                  "simulate entries even when hypotheses fail");
  sweep->add_option("--jobs", opt.jobs, "concurrent sweep entries")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : petrowave::exit_code::config_error;
  }

  return petrowave::guarded(std::cerr, [&]() {
    const petrowave::ExperimentConfig cfg =
        petrowave::load_config(opt.config_path);
    const std::string out_dir =
        opt.output_override.empty() ? cfg.output_dir : opt.output_override;
    if (check->parsed())
      return petrowave::cmd_check(cfg, std::cout, out_dir);
    if (simulate->parsed())
      return petrowave::cmd_simulate(cfg, std::cout, out_dir, opt.force);
    if (envelope->parsed())
      return petrowave::cmd_envelope(cfg, std::cout, out_dir);
    if (fit->parsed()) return petrowave::cmd_fit(cfg, std::cout, out_dir);
    if (sweep->parsed())
      return petrowave::cmd_sweep(cfg, std::cout, out_dir, opt.force,
                                  opt.jobs);
    return petrowave::exit_code::config_error;
  });
}
