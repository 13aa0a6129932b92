// Command-line front end: run, sweep, sobol, pdp, regret, layout.

#include <iostream>

#include <CLI11.hpp>

#include "symbiosim/commands.hpp"
#include "symbiosim/io.hpp"
#include "symbiosim/parallel.hpp"

int main(int argc, char** argv) {
  using namespace symbiosim;
  CLI::App app{"Spatial byproduct market simulator with learning sellers"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  const std::size_t workers = default_workers();

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Execute one simulation run");
  run->add_option("config", run_opts.config, "Configuration file")->required();
  run->add_option("-o,--out", run_opts.out_dir, "Output directory")->required();
  run->add_option("--override", run_opts.overrides, "key=value, applied after the file");
  run->add_option("--trace-until", run_opts.trace_until,
                  "Write auction round traces for timesteps below this bound");

  SweepOptions sweep_opts;
  sweep_opts.workers = workers;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid with replicates");
  sweep->add_option("config", sweep_opts.config, "Configuration file")->required();
  sweep->add_option("-o,--out", sweep_opts.out_dir, "Output directory")->required();
  sweep->add_option("--override", sweep_opts.overrides, "key=value, applied after the file");
  sweep->add_option("--grid", sweep_opts.grid, "key=v1,v2,... or key=start:stop:step")
      ->required();
  sweep->add_option("-r,--replicates", sweep_opts.replicates, "Runs per grid cell");
  sweep->add_option("-j,--workers", sweep_opts.workers,
                    "Concurrent runs (default: SYMBIOSIM_WORKERS or hardware threads)");
  sweep->add_option("--window", sweep_opts.window, "Late-run averaging window in timesteps");
  bool no_run_files = false;
  sweep->add_flag("--no-run-files", no_run_files, "Skip per-run timeseries files");

  SobolOptionsCli sobol_opts;
  sobol_opts.workers = workers;
  std::uint64_t sobol_seed = 0;
  auto* sobol = app.add_subcommand("sobol", "Sobol indices by Saltelli sampling");
  sobol->add_option("config", sobol_opts.config, "Base configuration file")->required();
  sobol->add_option("-o,--out", sobol_opts.out_dir, "Output directory")->required();
  sobol->add_option("--override", sobol_opts.overrides, "key=value, e.g. horizon=300");
  sobol->add_option("--base-n", sobol_opts.base_n, "Saltelli base sample size");
  sobol->add_option("-r,--replicates", sobol_opts.replicates, "Simulations averaged per point");
  sobol->add_option("--window", sobol_opts.window, "Late-run averaging window in timesteps");
  auto* sobol_seed_opt = sobol->add_option("--seed", sobol_seed, "Master seed (default: run.seed)");
  sobol->add_flag("--second-order", sobol_opts.second_order, "Also estimate pairwise indices");
  sobol->add_option("-j,--workers", sobol_opts.workers, "Concurrent model evaluations");

  PdpOptionsCli pdp_opts;
  pdp_opts.workers = workers;
  std::uint64_t pdp_seed = 0;
  auto* pdp = app.add_subcommand("pdp", "Partial dependence and ICE tables");
  pdp->add_option("config", pdp_opts.config, "Base configuration file")->required();
  pdp->add_option("-o,--out", pdp_opts.out_dir, "Output directory")->required();
  pdp->add_option("--override", pdp_opts.overrides, "key=value, e.g. horizon=300");
  pdp->add_option("--sweep-dim", pdp_opts.sweep_dim, "c_d, s, cs or c_t");
  pdp->add_option("--levels", pdp_opts.levels, "Fixed density levels")->delimiter(',');
  pdp->add_option("--grid-n", pdp_opts.grid_n, "Points along the swept dimension");
  pdp->add_option("--background-n", pdp_opts.background_n, "ICE lines per density level");
  pdp->add_option("-r,--replicates", pdp_opts.replicates, "Simulations averaged per point");
  pdp->add_option("--window", pdp_opts.window, "Late-run averaging window in timesteps");
  auto* pdp_seed_opt = pdp->add_option("--seed", pdp_seed, "Master seed (default: run.seed)");
  pdp->add_option("-j,--workers", pdp_opts.workers, "Concurrent model evaluations");

  RegretOptionsCli regret_opts;
  auto* regret = app.add_subcommand("regret", "Run with counterfactual regret instrumentation");
  regret->add_option("config", regret_opts.config, "Configuration file")->required();
  regret->add_option("-o,--out", regret_opts.out_dir, "Output directory")->required();
  regret->add_option("--override", regret_opts.overrides, "key=value, applied after the file");
  regret->add_option("--window", regret_opts.window, "Rolling-median window");

  LayoutOptionsCli layout_opts;
  auto* layout = app.add_subcommand("layout", "Write the firm layout of a configuration as JSON");
  layout->add_option("config", layout_opts.config, "Configuration file")->required();
  layout->add_option("-o,--out", layout_opts.out, "Output JSON path")->required();
  layout->add_option("--override", layout_opts.overrides, "key=value, applied after the file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*run) return cmd_run(run_opts, std::cerr);
  if (*sweep) {
    sweep_opts.per_run_files = !no_run_files;
    return cmd_sweep(sweep_opts, std::cerr);
  }
  if (*sobol) {
    if (*sobol_seed_opt) sobol_opts.seed = sobol_seed;
    return cmd_sobol(sobol_opts, std::cerr);
  }
  if (*pdp) {
    if (*pdp_seed_opt) pdp_opts.seed = pdp_seed;
    return cmd_pdp(pdp_opts, std::cerr);
  }
  if (*regret) return cmd_regret(regret_opts, std::cerr);
  if (*layout) return cmd_layout(layout_opts, std::cerr);
  return kExitConfig;
}
