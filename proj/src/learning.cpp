#include "symbiosim/learning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "symbiosim/market.hpp"

namespace symbiosim {

ActionGrid build_grid(std::size_t K, double c_d, double p_m) {
  if (K < 2) throw ConfigError("K: must be >= 2");
  if (!(p_m > 0.0)) throw ConfigError("p_m: must be > 0");
  if (!(c_d >= 0.0)) throw ConfigError("c_d: must be >= 0");
  ActionGrid grid;
  grid.phi_min = -c_d / p_m;
  grid.values.resize(K);
  const double span = 1.0 - grid.phi_min;
  for (std::size_t k = 0; k < K; ++k) {
    grid.values[k] = grid.phi_min + (static_cast<double>(k) / static_cast<double>(K - 1)) * span;
  }
  grid.values.front() = grid.phi_min;
  grid.values.back() = 1.0;
  return grid;
}

double TemperatureSchedule::at(std::size_t t) const {
  return std::max(tau_min, tau_0 * std::pow(decay, static_cast<double>(t)));
}

PolicyState make_policy(std::size_t K, const TemperatureSchedule& schedule, double reward_scale) {
  if (!(reward_scale > 0.0)) throw ConfigError("reward_scale: must be > 0");
  PolicyState state;
  state.weights.assign(K, 0.0);
  state.schedule = schedule;
  state.tau = schedule.at(0);
  state.reward_scale = reward_scale;
  return state;
}

PolicyState update_weights(PolicyState state, std::size_t chosen_k, double reward, double alpha) {
  if (chosen_k < 1 || chosen_k > state.weights.size()) {
    throw ContractViolation("update_weights: arm " + std::to_string(chosen_k) + " out of range");
  }
  if (!std::isfinite(reward)) throw ContractViolation("update_weights: non-finite reward");
  double& w = state.weights[chosen_k - 1];
  w = alpha * w + (1.0 - alpha) * reward;
  return state;
}

std::vector<double> softmax_probabilities(std::span<const double> weights, double temperature) {
  std::vector<double> p(weights.size());
  if (weights.empty()) return p;
  const double top = *std::max_element(weights.begin(), weights.end());
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    p[k] = std::exp((weights[k] - top) / temperature);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> action_probabilities(const PolicyState& state) {
  return softmax_probabilities(state.weights, state.tau * state.reward_scale);
}

std::size_t sample_action(const PolicyState& state, Rng& rng) {
  const std::vector<double> p = action_probabilities(state);
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    cumulative += p[k];
    if (u < cumulative) return k + 1;
  }
  // u landed in the rounding gap above the last partial sum.
  for (std::size_t k = p.size(); k > 0; --k) {
    if (p[k - 1] > 0.0) return k;
  }
  return p.size();
}

PolicyState advance_temperature(PolicyState state) {
  ++state.t;
  state.tau = state.schedule.at(state.t);
  return state;
}

nlohmann::json to_json(const PolicyState& state) {
  return {{"t", state.t}, {"tau", state.tau}, {"weights", state.weights}};
}

}  // namespace symbiosim
