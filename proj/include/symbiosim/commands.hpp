#pragma once

// Entry points behind the command-line subcommands. Each returns a process
// exit status: 0 on success, 1 on a runtime or I/O failure, 2 on a
// configuration error. Diagnostics go to `err`.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace symbiosim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::vector<std::string> overrides;
  std::size_t trace_until = 0;  // trace auction rounds for timesteps < trace_until
};

struct SweepOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::vector<std::string> overrides;
  std::vector<std::string> grid;  // "key=v1,v2" or "key=start:stop:step"
  std::size_t replicates = 10;
  std::size_t workers = 1;
  std::size_t window = 100;
  bool per_run_files = true;
};

struct SobolOptionsCli {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::vector<std::string> overrides;
  std::size_t base_n = 256;
  std::size_t replicates = 2;
  std::size_t window = 100;
  std::optional<std::uint64_t> seed;
  bool second_order = false;
  std::size_t workers = 1;
};

struct PdpOptionsCli {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::vector<std::string> overrides;
  std::string sweep_dim = "c_d";
  std::vector<double> levels{1e-2, 1e-3, 1e-4};
  std::size_t grid_n = 10;
  std::size_t background_n = 20;
  std::size_t replicates = 2;
  std::size_t window = 100;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
};

struct RegretOptionsCli {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::vector<std::string> overrides;
  std::size_t window = 50;
};

struct LayoutOptionsCli {
  std::filesystem::path config;
  std::filesystem::path out;
  std::vector<std::string> overrides;
};

int cmd_run(const RunOptions& options, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& err);
int cmd_sobol(const SobolOptionsCli& options, std::ostream& err);
int cmd_pdp(const PdpOptionsCli& options, std::ostream& err);
int cmd_regret(const RegretOptionsCli& options, std::ostream& err);
int cmd_layout(const LayoutOptionsCli& options, std::ostream& err);

}  // namespace symbiosim
