#include "symbiosim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "symbiosim/metrics.hpp"
#include "symbiosim/spatial.hpp"

namespace symbiosim {

bool RegretSchedule::active_at(std::size_t t) const {
  switch (mode) {
    case RegretMode::off:
      return false;
    case RegretMode::every_step:
      return true;
    case RegretMode::sampled:
      return every > 0 && t % every == 0;
  }
  return false;
}

std::string RegretSchedule::to_string() const {
  switch (mode) {
    case RegretMode::off:
      return "off";
    case RegretMode::every_step:
      return "every_step";
    case RegretMode::sampled:
      return "sampled:" + std::to_string(every);
  }
  return "off";
}

RegretSchedule RegretSchedule::parse(const std::string& text) {
  if (text == "off") return {};
  if (text == "every_step") return {RegretMode::every_step, 1};
  const std::string prefix = "sampled:";
  if (text.rfind(prefix, 0) == 0) {
    std::size_t pos = 0;
    const std::string digits = text.substr(prefix.size());
    unsigned long n = 0;
    try {
      n = std::stoul(digits, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == digits.size() && pos > 0 && n > 0) return {RegretMode::sampled, n};
  }
  throw ConfigError("regret_mode: expected off, every_step or sampled:<n>, got '" + text + "'");
}

double TimestepRecord::total_reward() const {
  return std::accumulate(per_seller_reward.begin(), per_seller_reward.end(), 0.0);
}

std::optional<double> TimestepRecord::total_regret() const {
  if (!regret) return std::nullopt;
  return regret->total_regret;
}

FirmLayout build_population(const MarketParams& params) {
  params.validate();
  LayoutSpec spec{params.n_firms, params.n_clusters, params.rho, params.cs, params.seed};
  FirmLayout layout = generate_layout(spec, params.buyer_fraction);

  Rng rng = make_rng(params.seed, "population");
  double raw_demand = 0.0;
  double supply = 0.0;
  for (auto& b : layout.buyers) {
    b.q_need = uniform(rng, params.demand_range.first, params.demand_range.second);
    b.beta = uniform(rng, params.beta_range.first, params.beta_range.second);
    raw_demand += b.q_need;
  }
  for (auto& s : layout.sellers) {
    s.q_supply = uniform(rng, params.demand_range.first, params.demand_range.second);
    supply += s.q_supply;
  }
  if (!(supply > 0.0)) throw ConfigError("demand_range: total raw supply is zero");
  if (!(raw_demand > 0.0)) throw ConfigError("demand_range: total raw demand is zero");

  const double factor = params.s * supply / raw_demand;
  for (auto& b : layout.buyers) b.q_need *= factor;
  return layout;
}

double reward_scale(const MarketParams& params, const FirmLayout& layout, std::size_t j) {
  const double supply = layout.sellers.at(j).q_supply;
  return supply > 0.0 ? params.p_m * supply : params.p_m;
}

std::vector<PolicyState> initial_policies(const MarketParams& params, const FirmLayout& layout) {
  const TemperatureSchedule schedule{params.tau_0, params.tau_min, params.decay};
  std::vector<PolicyState> policies;
  policies.reserve(layout.sellers.size());
  for (std::size_t j = 0; j < layout.sellers.size(); ++j) {
    policies.push_back(make_policy(params.K, schedule, reward_scale(params, layout, j)));
  }
  return policies;
}

std::vector<Rng> policy_streams(const MarketParams& params, std::size_t n_sellers) {
  std::vector<Rng> rngs;
  rngs.reserve(n_sellers);
  for (std::size_t j = 0; j < n_sellers; ++j) rngs.push_back(make_rng(params.seed, "policy", j));
  return rngs;
}

StepOutput step(const FirmLayout& layout, const ActionGrid& grid, const MarketParams& params,
                std::vector<PolicyState>& policies, std::span<Rng> policy_rngs, std::size_t t,
                const RegretSchedule& regret, const RoundObserver& observer) {
  const std::size_t ns = layout.sellers.size();
  if (policies.size() != ns || policy_rngs.size() != ns) {
    throw ContractViolation("step: need one policy and one random stream per seller");
  }

  StepOutput out;
  TimestepRecord& rec = out.record;
  rec.t = t;
  rec.tau = ns > 0 ? policies.front().tau : 0.0;
  rec.per_seller_action.resize(ns);
  std::vector<double> phi(ns);
  for (std::size_t j = 0; j < ns; ++j) {
    rec.per_seller_action[j] = sample_action(policies[j], policy_rngs[j]);
    phi[j] = grid.at(rec.per_seller_action[j]);
  }

  out.clearing = run_auction(layout, params, phi, observer);
  rec.per_seller_reward = seller_rewards(layout, params, out.clearing);

  for (std::size_t j = 0; j < ns; ++j) {
    policies[j] = advance_temperature(update_weights(std::move(policies[j]), rec.per_seller_action[j],
                                                     rec.per_seller_reward[j], params.alpha));
  }

  const MarketAggregates agg = aggregate(layout, out.clearing);
  rec.mean_price = agg.mean_price;
  rec.traded_qty = agg.q_bought;
  rec.si = symbiosis_index(agg.q_bought, agg.q_toSell, agg.q_needed);

  if (regret.active_at(t)) {
    rec.regret = counterfactual_regret(layout, params, rec.per_seller_action, grid, t);
  }
  return out;
}

RunResult run(const RunConfig& config, const StepTracer& tracer) {
  const MarketParams& params = config.params;
  RunResult result;
  result.layout = build_population(params);
  result.grid = build_grid(params.K, params.c_d, params.p_m);
  std::vector<PolicyState> policies = initial_policies(params, result.layout);
  std::vector<Rng> rngs = policy_streams(params, result.layout.sellers.size());

  result.records.reserve(params.horizon);
  for (std::size_t t = 0; t < params.horizon; ++t) {
    RoundObserver observer;
    if (tracer) observer = [&tracer, t](const RoundTrace& trace) { tracer(t, trace); };
    StepOutput out =
        step(result.layout, result.grid, params, policies, rngs, t, config.regret, observer);
    result.records.push_back(std::move(out.record));
    if (config.record_contracts) result.contracts.push_back(std::move(out.clearing.contracts));
    if (config.snapshot_interval > 0 && (t + 1) % config.snapshot_interval == 0) {
      result.snapshots.push_back(PolicySnapshot{t + 1, policies});
    }
  }
  result.final_policies = std::move(policies);
  return result;
}

std::optional<double> late_mean_price(std::span<const TimestepRecord> records, std::size_t window) {
  const std::size_t n = std::min(window, records.size());
  double qty = 0.0;
  double value = 0.0;
  for (const auto& r : records.last(n)) {
    if (!r.mean_price) continue;
    qty += r.traded_qty;
    value += r.traded_qty * *r.mean_price;
  }
  if (qty <= 0.0) return std::nullopt;
  return value / qty;
}

double late_mean_si(std::span<const TimestepRecord> records, std::size_t window) {
  const std::size_t n = std::min(window, records.size());
  if (n == 0) return 0.0;
  double total = 0.0;
  for (const auto& r : records.last(n)) total += r.si;
  return total / static_cast<double>(n);
}

}  // namespace symbiosim
