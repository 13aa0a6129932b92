#pragma once

// Full runs: population construction, the per-timestep learn-and-clear loop,
// and recorded time series.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symbiosim/auction.hpp"
#include "symbiosim/learning.hpp"
#include "symbiosim/market.hpp"
#include "symbiosim/random.hpp"
#include "symbiosim/regret.hpp"

namespace symbiosim {

enum class RegretMode { off, every_step, sampled };

struct RegretSchedule {
  RegretMode mode = RegretMode::off;
  std::size_t every = 1;  // period for RegretMode::sampled

  bool active_at(std::size_t t) const;
  std::string to_string() const;
  /// Parses "off", "every_step" or "sampled:<n>".
  static RegretSchedule parse(const std::string& text);

  friend bool operator==(const RegretSchedule&, const RegretSchedule&) = default;
};

struct RunConfig {
  MarketParams params;
  bool record_contracts = false;
  RegretSchedule regret;
  std::size_t snapshot_interval = 0;  // 0 disables policy snapshots
};

struct TimestepRecord {
  std::size_t t = 0;
  std::optional<double> mean_price;  // quantity-weighted; empty without trades
  double traded_qty = 0.0;
  double si = 0.0;
  std::vector<double> per_seller_reward;
  std::vector<std::size_t> per_seller_action;  // 1-based grid indices
  std::optional<RegretRecord> regret;
  double tau = 0.0;  // temperature the actions were sampled at

  double total_reward() const;
  std::optional<double> total_regret() const;

  friend bool operator==(const TimestepRecord&, const TimestepRecord&) = default;
};

struct PolicySnapshot {
  std::size_t t = 0;
  std::vector<PolicyState> policies;
};

struct RunResult {
  FirmLayout layout;
  ActionGrid grid;
  std::vector<TimestepRecord> records;
  std::vector<PolicyState> final_policies;
  std::vector<std::vector<Contract>> contracts;  // per timestep, when recorded
  std::vector<PolicySnapshot> snapshots;
};

/// Generates the layout, draws demands, supplies and tolerances, then rescales
/// every buyer demand by one factor so the scarcity equals params.s.
FirmLayout build_population(const MarketParams& params);

/// Softmax normalization constant of seller j: p_m times its own supply, the
/// order of magnitude of its best achievable reward.
double reward_scale(const MarketParams& params, const FirmLayout& layout, std::size_t j);

std::vector<PolicyState> initial_policies(const MarketParams& params, const FirmLayout& layout);

std::vector<Rng> policy_streams(const MarketParams& params, std::size_t n_sellers);

struct StepOutput {
  TimestepRecord record;
  ClearingResult clearing;
};

/// One timestep: sample actions, clear the market from full endowments, pay
/// rewards and update every seller's policy in place.
StepOutput step(const FirmLayout& layout, const ActionGrid& grid, const MarketParams& params,
                std::vector<PolicyState>& policies, std::span<Rng> policy_rngs, std::size_t t,
                const RegretSchedule& regret = {}, const RoundObserver& observer = {});

/// Receives auction round traces tagged with their timestep.
using StepTracer = std::function<void(std::size_t t, const RoundTrace&)>;

RunResult run(const RunConfig& config, const StepTracer& tracer = {});

/// Quantity-weighted mean price over the last `window` records; nullopt when
/// nothing traded in that window.
std::optional<double> late_mean_price(std::span<const TimestepRecord> records, std::size_t window);

/// Mean symbiosis index over the last `window` records.
double late_mean_si(std::span<const TimestepRecord> records, std::size_t window);

}  // namespace symbiosim
