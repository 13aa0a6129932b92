#pragma once

// Global sensitivity analysis by direct simulation: Latin hypercube designs,
// Saltelli-sampled Sobol indices and partial-dependence / ICE tables.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "symbiosim/market.hpp"

namespace symbiosim {

enum class Scale { linear, log2, log10 };

struct Dimension {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  Scale scale = Scale::linear;

  /// Position of `value` in [0, 1] along the transformed axis.
  double to_unit(double value) const;
  /// Inverse of to_unit, clamped so results never leave [lo, hi].
  double from_unit(double u) const;
};

struct ParamSpace {
  std::vector<Dimension> dims;

  std::size_t size() const { return dims.size(); }
  std::size_t index_of(const std::string& name) const;

  /// c_d in [0,200], s in [0.25,2] (log2), rho in [1e-5,1e-1] (log10),
  /// cs in [0,0.5], c_t in [0,10].
  static ParamSpace market_default();
};

using Point = std::vector<double>;

/// Maps a model input point and a reproducibility seed to its outputs.
using Model = std::function<std::vector<double>(const Point&, std::uint64_t seed)>;

/// One sample per equiprobable stratum in every dimension (in transformed
/// space), jittered within strata, strata permuted independently per dimension.
std::vector<Point> lhs_sample(const ParamSpace& space, std::size_t n, std::uint64_t seed);

std::vector<Point> lhs_unit(std::size_t n, std::size_t dims, std::uint64_t seed);

/// Saltelli design rows: for each base row A, B, AB_1..AB_k and, with second
/// order enabled, BA_1..BA_k.
struct SaltelliDesign {
  std::size_t base_n = 0;
  std::size_t k = 0;
  bool second_order = false;
  std::vector<Point> points;
  std::vector<std::string> block;  // "A", "B", "AB:<dim>", "BA:<dim>"
  std::vector<std::size_t> base_row;

  std::size_t rows_per_base() const { return second_order ? 2 * k + 2 : k + 2; }
};

SaltelliDesign saltelli_design(const ParamSpace& space, std::size_t base_n, std::uint64_t seed,
                               bool second_order = false);

struct SobolIndices {
  std::string output;
  std::vector<double> s1;
  std::vector<double> st;
  std::vector<std::vector<double>> s2;  // upper triangle filled when requested
  double variance = 0.0;
  bool degenerate = false;
};

struct SobolOptions {
  std::size_t base_n = 256;
  std::uint64_t seed = 0;
  bool second_order = false;
  std::size_t workers = 1;
};

struct SobolResult {
  SaltelliDesign design;
  std::vector<std::uint64_t> row_seeds;
  std::vector<std::vector<double>> outputs;  // per design row
  std::vector<SobolIndices> indices;         // per model output
  std::size_t evaluations = 0;
  std::vector<std::string> warnings;
};

/// Evaluates `model` on every design row (row seeds derived from the master
/// seed and row index) and estimates first-order (Saltelli 2010), total-order
/// (Jansen) and optionally pairwise indices. Requires base_n >= 64 unless
/// `allow_small` is set for smoke runs.
SobolResult sobol_estimate(const ParamSpace& space, const Model& model,
                           std::span<const std::string> output_names, const SobolOptions& options,
                           bool allow_small = false);

/// Indices from precomputed outputs laid out as in `design`.
std::vector<SobolIndices> sobol_indices(const SaltelliDesign& design,
                                        const std::vector<std::vector<double>>& outputs,
                                        std::span<const std::string> output_names,
                                        std::vector<std::string>* warnings = nullptr);

struct PdpIceOptions {
  std::size_t sweep_dim = 0;
  std::size_t density_dim = 2;
  std::vector<double> density_levels;
  std::size_t grid_n = 10;
  std::size_t background_n = 20;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct PdpIceRow {
  double density = 0.0;
  std::optional<std::size_t> line;  // empty for the partial-dependence row
  double sweep_value = 0.0;
  std::vector<double> outputs;
};

/// For each density level: LHS background points over the other dimensions,
/// one ICE line per background point along an even grid of the sweep
/// dimension (one seed per line), then the pointwise mean as the PDP.
std::vector<PdpIceRow> pdp_ice(const ParamSpace& space, const PdpIceOptions& options,
                               const Model& model);

struct ScenarioOptions {
  MarketParams base;
  std::size_t replicates = 2;
  std::size_t window = 100;  // late-run averaging window
};

struct ScenarioOutcome {
  Point point;
  std::size_t replicate = 0;
  double final_si = 0.0;
  double final_price = 0.0;
};

/// Copies the named coordinates of `point` (c_d, s, rho, cs, c_t) into params.
MarketParams apply_point(MarketParams params, const ParamSpace& space, const Point& point);

/// One simulation of `point`: mean SI and quantity-weighted mean price over the
/// last `window` steps. Without late trades the price is the outside option p_m.
ScenarioOutcome evaluate_scenario(const ScenarioOptions& options, const ParamSpace& space,
                                  const Point& point, std::size_t replicate, std::uint64_t seed);

/// Simulator closure returning {si, price} averaged over the replicates.
Model scenario_model(const ParamSpace& space, const ScenarioOptions& options);

nlohmann::json to_json(const ParamSpace& space);

}  // namespace symbiosim
