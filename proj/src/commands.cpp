#include "symbiosim/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>

#include "symbiosim/io.hpp"
#include "symbiosim/parallel.hpp"
#include "symbiosim/sensitivity.hpp"
#include "symbiosim/spatial.hpp"

namespace symbiosim {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Runs `body`, mapping configuration errors to exit code 2 and everything
/// else to 1.
template <typename Body>
int guarded(const char* command, std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << command << ": configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << command << ": " << e.what() << "\n";
    return kExitFailure;
  }
}

void describe_config(Manifest& manifest, const RunConfig& config) {
  manifest.set("config", config_to_json(config));
  manifest.set("config_sha256", sha256_hex(config_to_json(config).dump()));
  manifest.set("master_seed", config.params.seed);
}

double sample_std(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& err) {
  return guarded("run", err, [&] {
    const RunConfig config = load_config(options.config, options.overrides);
    Manifest manifest("run", options.out_dir);
    describe_config(manifest, config);

    std::string trace;
    StepTracer tracer;
    if (options.trace_until > 0) {
      tracer = [&](std::size_t t, const RoundTrace& round) {
        if (t >= options.trace_until) return;
        nlohmann::json row = to_json(round);
        row["t"] = t;
        trace += row.dump() + "\n";
      };
    }

    const auto start = std::chrono::steady_clock::now();
    const RunResult result = run(config, tracer);
    const double elapsed = seconds_since(start);

    manifest.emit("timeseries.csv", timeseries_csv(result.records));
    if (config.regret.mode != RegretMode::off) {
      manifest.emit("regret.csv", regret_csv(result.records, result.layout.sellers.size(), 50));
    }
    if (config.record_contracts) manifest.emit("contracts.jsonl", contracts_jsonl(result.contracts));
    if (config.snapshot_interval > 0) {
      manifest.emit("policies.jsonl", snapshots_jsonl(result.snapshots));
    }
    if (options.trace_until > 0) manifest.emit("auction_trace.jsonl", trace);
    manifest.add_run({{"run_id", 0}, {"seed", config.params.seed}, {"seconds", elapsed}});
    manifest.finish();
    return kExitOk;
  });
}

int cmd_layout(const LayoutOptionsCli& options, std::ostream& err) {
  return guarded("layout", err, [&] {
    const RunConfig config = load_config(options.config, options.overrides);
    const FirmLayout layout = build_population(config.params);
    write_file(options.out, layout_to_json(layout, config.params.seed).dump(2) + "\n");
    return kExitOk;
  });
}

int cmd_regret(const RegretOptionsCli& options, std::ostream& err) {
  return guarded("regret", err, [&] {
    if (options.window < 1) throw ConfigError("window: must be >= 1");
    RunConfig config = load_config(options.config, options.overrides);
    if (config.regret.mode == RegretMode::off) config.regret = {RegretMode::every_step, 1};
    Manifest manifest("regret", options.out_dir);
    describe_config(manifest, config);
    manifest.set("rolling_window", options.window);

    const auto start = std::chrono::steady_clock::now();
    const RunResult result = run(config);
    const double elapsed = seconds_since(start);

    manifest.emit("timeseries.csv", timeseries_csv(result.records));
    manifest.emit("regret.csv",
                  regret_csv(result.records, result.layout.sellers.size(), options.window));
    manifest.add_run({{"run_id", 0}, {"seed", config.params.seed}, {"seconds", elapsed}});
    manifest.finish();
    return kExitOk;
  });
}

int cmd_sweep(const SweepOptions& options, std::ostream& err) {
  return guarded("sweep", err, [&] {
    const RunConfig base = load_config(options.config, options.overrides);
    if (options.replicates < 1) throw ConfigError("replicates: must be >= 1");
    if (options.window < 1) throw ConfigError("window: must be >= 1");
    std::vector<GridAxis> axes;
    for (const auto& g : options.grid) axes.push_back(parse_grid_axis(g));

    // Cartesian product, first axis outermost.
    std::vector<std::vector<double>> cells{{}};
    for (const auto& axis : axes) {
      std::vector<std::vector<double>> next;
      for (const auto& cell : cells) {
        for (double v : axis.values) {
          auto c = cell;
          c.push_back(v);
          next.push_back(std::move(c));
        }
      }
      cells = std::move(next);
    }

    std::vector<RunConfig> cell_configs;
    for (const auto& cell : cells) {
      RunConfig cfg = base;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        set_config_value(cfg, axes[a].key, format_double(cell[a]));
      }
      cfg.params.validate();
      cell_configs.push_back(cfg);
    }

    // Replicate r uses the same seed in every cell, so cells differ only in
    // their parameters.
    std::vector<std::uint64_t> replicate_seeds(options.replicates);
    for (std::size_t r = 0; r < options.replicates; ++r) {
      replicate_seeds[r] = derive_seed(base.params.seed, "replicate", r);
    }

    const std::size_t n_runs = cells.size() * options.replicates;
    std::vector<double> final_price(n_runs);
    std::vector<double> final_si(n_runs);
    std::vector<std::string> run_file(n_runs);
    std::vector<std::string> run_sha(n_runs);
    std::vector<std::size_t> run_bytes(n_runs);

    Manifest manifest("sweep", options.out_dir);
    describe_config(manifest, base);
    const auto start = std::chrono::steady_clock::now();
    const auto outcomes = run_batch(n_runs, options.workers, [&](std::size_t i) {
      const std::size_t c = i / options.replicates;
      const std::size_t r = i % options.replicates;
      RunConfig cfg = cell_configs[c];
      cfg.params.seed = replicate_seeds[r];
      cfg.regret = {};
      const RunResult result = run(cfg);
      final_price[i] = late_mean_price(result.records, options.window).value_or(cfg.params.p_m);
      final_si[i] = late_mean_si(result.records, options.window);
      if (options.per_run_files) {
        const std::string name =
            "runs/cell_" + std::to_string(c) + "_rep_" + std::to_string(r) + ".csv";
        const std::string csv = timeseries_csv(result.records);
        write_file(options.out_dir / name, csv);
        run_file[i] = name;
        run_sha[i] = sha256_hex(csv);
        run_bytes[i] = csv.size();
      }
    });
    const double wall = seconds_since(start);

    std::string header = "cell";
    for (const auto& axis : axes) header += "," + csv_field(axis.key);
    header += ",n,failed,price_mean,price_std,si_mean,si_std\n";
    std::string table = header;
    std::size_t failures = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::vector<double> prices;
      std::vector<double> sis;
      std::size_t failed = 0;
      for (std::size_t r = 0; r < options.replicates; ++r) {
        const std::size_t i = c * options.replicates + r;
        if (!outcomes[i].ok) {
          ++failed;
          continue;
        }
        prices.push_back(final_price[i]);
        sis.push_back(final_si[i]);
      }
      failures += failed;
      const double pm = mean_of(prices);
      const double sm = mean_of(sis);
      table += std::to_string(c);
      for (double v : cells[c]) table += "," + format_double(v);
      table += "," + std::to_string(prices.size()) + "," + std::to_string(failed);
      table += "," + format_double(pm) + "," + format_double(sample_std(prices, pm));
      table += "," + format_double(sm) + "," + format_double(sample_std(sis, sm));
      table += "\n";
    }

    for (std::size_t i = 0; i < n_runs; ++i) {
      const std::size_t c = i / options.replicates;
      const std::size_t r = i % options.replicates;
      nlohmann::json entry = {{"run_id", i},
                              {"cell", c},
                              {"replicate", r},
                              {"seed", replicate_seeds[r]},
                              {"seconds", outcomes[i].seconds},
                              {"ok", outcomes[i].ok}};
      if (!outcomes[i].ok) entry["error"] = outcomes[i].error;
      manifest.add_run(std::move(entry));
      if (outcomes[i].ok && options.per_run_files) {
        manifest.add_file(run_file[i], run_bytes[i], run_sha[i]);
      }
    }
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& axis : axes) grid.push_back({{"key", axis.key}, {"values", axis.values}});
    manifest.set("grid", grid);
    manifest.set("replicates", options.replicates);
    manifest.set("workers", options.workers);
    manifest.set("late_window", options.window);
    manifest.set("batch_seconds", wall);
    manifest.set("runs_per_minute", wall > 0.0 ? 60.0 * static_cast<double>(n_runs) / wall : 0.0);
    manifest.set("failed_runs", failures);
    manifest.emit("sweep.csv", table);
    manifest.finish();
    if (failures > 0) {
      err << "sweep: " << failures << " of " << n_runs << " runs failed (see manifest.json)\n";
      return kExitFailure;
    }
    return kExitOk;
  });
}

int cmd_sobol(const SobolOptionsCli& options, std::ostream& err) {
  return guarded("sobol", err, [&] {
    const RunConfig base = load_config(options.config, options.overrides);
    const ParamSpace space = ParamSpace::market_default();
    const std::uint64_t seed = options.seed.value_or(base.params.seed);
    if (options.base_n < 64) {
      err << "sobol: base_n=" << options.base_n << " is below 64; indices are for smoke use only\n";
    }
    const ScenarioOptions scenario{base.params, options.replicates, options.window};
    const std::vector<std::string> outputs{"si", "price"};
    const SobolResult res =
        sobol_estimate(space, scenario_model(space, scenario), outputs,
                       SobolOptions{options.base_n, seed, options.second_order, options.workers},
                       /*allow_small=*/true);

    Manifest manifest("sobol", options.out_dir);
    describe_config(manifest, base);
    manifest.set("master_seed", seed);
    manifest.set("space", to_json(space));
    manifest.set("base_n", options.base_n);
    manifest.set("replicates", options.replicates);
    manifest.set("late_window", options.window);
    manifest.set("second_order", options.second_order);
    manifest.set("evaluations", res.evaluations);
    manifest.set("warnings", res.warnings);

    std::string design = "row,block,base_row,seed";
    for (const auto& d : space.dims) design += "," + d.name;
    design += "\n";
    std::string outcomes = "row,si,price\n";
    for (std::size_t r = 0; r < res.design.points.size(); ++r) {
      design += std::to_string(r) + "," + csv_field(res.design.block[r]) + "," +
                std::to_string(res.design.base_row[r]) + "," + std::to_string(res.row_seeds[r]);
      for (double v : res.design.points[r]) design += "," + format_double(v);
      design += "\n";
      outcomes += std::to_string(r);
      for (double v : res.outputs[r]) outcomes += "," + format_double(v);
      outcomes += "\n";
    }
    std::string table = "output,parameter,S1,ST\n";
    std::string second = "output,parameter_a,parameter_b,S2\n";
    for (const auto& idx : res.indices) {
      for (std::size_t d = 0; d < space.size(); ++d) {
        table += idx.output + "," + space.dims[d].name + "," + format_double(idx.s1[d]) + "," +
                 format_double(idx.st[d]) + "\n";
        for (std::size_t e = d + 1; e < space.size() && options.second_order; ++e) {
          second += idx.output + "," + space.dims[d].name + "," + space.dims[e].name + "," +
                    format_double(idx.s2[d][e]) + "\n";
        }
      }
    }
    manifest.emit("design.csv", design);
    manifest.emit("outcomes.csv", outcomes);
    manifest.emit("sobol.csv", table);
    if (options.second_order) manifest.emit("sobol_s2.csv", second);
    manifest.finish();
    return kExitOk;
  });
}

int cmd_pdp(const PdpOptionsCli& options, std::ostream& err) {
  return guarded("pdp", err, [&] {
    const RunConfig base = load_config(options.config, options.overrides);
    const ParamSpace space = ParamSpace::market_default();
    const std::uint64_t seed = options.seed.value_or(base.params.seed);
    if (options.levels.empty()) throw ConfigError("levels: at least one density level required");
    for (double rho : options.levels) {
      if (!(rho > 0.0)) throw ConfigError("levels: densities must be > 0");
    }
    PdpIceOptions pdp;
    pdp.sweep_dim = space.index_of(options.sweep_dim);
    pdp.density_dim = space.index_of("rho");
    pdp.density_levels = options.levels;
    pdp.grid_n = options.grid_n;
    pdp.background_n = options.background_n;
    pdp.seed = seed;
    pdp.workers = options.workers;
    const ScenarioOptions scenario{base.params, options.replicates, options.window};
    const auto rows = pdp_ice(space, pdp, scenario_model(space, scenario));

    std::string table = "density,line,sweep_dim,sweep_value,si,price\n";
    for (const auto& row : rows) {
      table += format_double(row.density) + ",";
      table += row.line ? std::to_string(*row.line) : std::string("pdp");
      table += "," + options.sweep_dim + "," + format_double(row.sweep_value);
      for (double v : row.outputs) table += "," + format_double(v);
      table += "\n";
    }
    Manifest manifest("pdp", options.out_dir);
    describe_config(manifest, base);
    manifest.set("master_seed", seed);
    manifest.set("space", to_json(space));
    manifest.set("sweep_dim", options.sweep_dim);
    manifest.set("density_levels", options.levels);
    manifest.set("grid_n", options.grid_n);
    manifest.set("background_n", options.background_n);
    manifest.set("replicates", options.replicates);
    manifest.set("late_window", options.window);
    manifest.emit("pdp_ice.csv", table);
    manifest.finish();
    return kExitOk;
  });
}

}  // namespace symbiosim
