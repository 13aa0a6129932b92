#pragma once

// Configuration files, CSV/JSON emission, checksums and the batch executor.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "symbiosim/simulation.hpp"

namespace symbiosim {

inline constexpr const char* kToolName = "symbiosim";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Keys required in every configuration file.
inline constexpr const char* kRequiredKeys[] = {"market.c_d", "market.s", "market.rho"};

/// Every recognised dotted key, in canonical order.
std::span<const std::string> config_keys();

/// Resolves a dotted key or a unique last component ("horizon" -> "run.horizon").
std::string canonical_key(const std::string& key);

/// Parses `key = value` lines (`#` starts a comment) into a RunConfig, then
/// applies `overrides` ("key=value"). Errors name the line and field.
RunConfig parse_config(const std::string& text, const std::string& source,
                       std::span<const std::string> overrides = {});

/// Reads a text config, or the "config" object of a JSON manifest.
RunConfig load_config(const std::filesystem::path& path,
                      std::span<const std::string> overrides = {});

/// Key/value snapshot that parse_config accepts back unchanged.
std::map<std::string, std::string> config_entries(const RunConfig& config);

/// Sets one field by dotted key (or unique last component) from its text form.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
nlohmann::json config_to_json(const RunConfig& config);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
std::string csv_field(const std::string& text);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes `content` to `path`, creating parent directories. Throws
/// std::runtime_error when the file cannot be written.
void write_file(const std::filesystem::path& path, const std::string& content);

std::string timeseries_csv(std::span<const TimestepRecord> records);
std::string regret_csv(std::span<const TimestepRecord> records, std::size_t n_sellers,
                       std::size_t window);
std::string contracts_jsonl(std::span<const std::vector<Contract>> per_step);
std::string snapshots_jsonl(std::span<const PolicySnapshot> snapshots);

/// Tracks emitted data files and their checksums for a manifest.
class Manifest {
 public:
  Manifest(std::string command, std::filesystem::path out_dir);

  void set(const std::string& key, nlohmann::json value);
  /// Writes `content` under out_dir and records its checksum.
  void emit(const std::string& relative, const std::string& content);
  /// Records a file written elsewhere (e.g. by a worker thread).
  void add_file(const std::string& relative, std::size_t bytes, const std::string& sha256);
  void add_run(nlohmann::json run);
  /// Writes manifest.json with wall-clock time since construction.
  void finish();

  const nlohmann::json& document() const { return doc_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }

 private:
  std::filesystem::path out_dir_;
  nlohmann::json doc_;
  std::chrono::steady_clock::time_point start_;
};

struct BatchOutcome {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
};

/// Runs job(i) for every i on up to `workers` threads, recording failures
/// instead of aborting. Outcomes are returned in index order.
std::vector<BatchOutcome> run_batch(std::size_t n, std::size_t workers,
                                    const std::function<void(std::size_t)>& job);

struct GridAxis {
  std::string key;  // canonical config key
  std::vector<double> values;
};

/// Parses "key=v1,v2,..." or "key=start:stop:step" (inclusive stop).
GridAxis parse_grid_axis(const std::string& text);

}  // namespace symbiosim
