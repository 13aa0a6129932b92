#pragma once

// Seller pricing policy: a discretized multiplier grid, exponential-moving-average
// arm values and Boltzmann sampling under an annealed temperature.

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "symbiosim/random.hpp"

namespace symbiosim {

/// K evenly spaced price multipliers from phi_min = -c_d / p_m up to 1.
struct ActionGrid {
  double phi_min = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  /// 1-based access, matching action indices.
  double at(std::size_t k) const { return values.at(k - 1); }
};

ActionGrid build_grid(std::size_t K, double c_d, double p_m);

struct TemperatureSchedule {
  double tau_0 = 1.0;
  double tau_min = 0.01;
  double decay = 0.996;

  /// max(tau_min, tau_0 * decay^t), evaluated in closed form.
  double at(std::size_t t) const;
};

struct PolicyState {
  std::vector<double> weights;  // per-arm reward estimates, currency units
  std::size_t t = 0;
  double tau = 1.0;
  TemperatureSchedule schedule;
  // Weights are divided by this before the softmax so that tau is dimensionless.
  double reward_scale = 1.0;
};

PolicyState make_policy(std::size_t K, const TemperatureSchedule& schedule, double reward_scale);

/// EMA step on arm `chosen_k` (1-based): w <- alpha * w + (1 - alpha) * reward.
/// Throws ContractViolation for an out-of-range arm or a non-finite reward.
PolicyState update_weights(PolicyState state, std::size_t chosen_k, double reward, double alpha);

/// Softmax of weights / temperature with the maximum subtracted first.
std::vector<double> softmax_probabilities(std::span<const double> weights, double temperature);

/// Arm probabilities of the current state (temperature tau * reward_scale).
std::vector<double> action_probabilities(const PolicyState& state);

/// Draws a 1-based arm by inverting the softmax CDF with one uniform01 draw.
std::size_t sample_action(const PolicyState& state, Rng& rng);

PolicyState advance_temperature(PolicyState state);

nlohmann::json to_json(const PolicyState& state);

}  // namespace symbiosim
