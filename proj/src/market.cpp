#include "symbiosim/market.hpp"

#include <cmath>

namespace symbiosim {

namespace {

void require(bool ok, const char* field, const char* rule) {
  if (!ok) throw ConfigError(std::string(field) + ": " + rule);
}

}  // namespace

std::size_t MarketParams::n_buyers() const {
  return static_cast<std::size_t>(std::floor(buyer_fraction * static_cast<double>(n_firms)));
}

std::size_t MarketParams::n_sellers() const { return n_firms - n_buyers(); }

void MarketParams::validate() const {
  require(std::isfinite(p_m) && p_m > 0.0, "p_m", "must be > 0");
  require(std::isfinite(c_t) && c_t >= 0.0, "c_t", "must be >= 0");
  require(std::isfinite(c_d) && c_d >= 0.0, "c_d", "must be >= 0");
  require(std::isfinite(s) && s > 0.0, "s", "must be > 0");
  require(std::isfinite(rho) && rho > 0.0, "rho", "must be > 0");
  require(cs >= 0.0 && cs <= 1.0, "cs", "must lie in [0, 1]");
  require(n_firms >= 2, "n_firms", "must be >= 2");
  require(n_clusters >= 1, "n_clusters", "must be >= 1");
  require(buyer_fraction > 0.0 && buyer_fraction < 1.0, "buyer_fraction",
          "must lie in (0, 1)");
  require(n_buyers() >= 1 && n_sellers() >= 1, "buyer_fraction",
          "must leave at least one buyer and one seller");
  require(beta_range.first > 0.0 && beta_range.first <= beta_range.second, "beta_range",
          "needs 0 < min <= max");
  require(demand_range.first > 0.0 && demand_range.first <= demand_range.second,
          "demand_range", "needs 0 < min <= max");
  require(K >= 2, "K", "must be >= 2");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha", "must lie in [0, 1]");
  require(tau_min > 0.0, "tau_min", "must be > 0");
  require(tau_0 >= tau_min, "tau_0", "must be >= tau_min");
  require(decay > 0.0 && decay <= 1.0, "decay", "must lie in (0, 1]");
}

double seller_reward(std::span<const double> qtys, std::span<const double> prices,
                     std::span<const double> transport_costs, double unsold, double c_d) {
  if (qtys.size() != prices.size() || qtys.size() != transport_costs.size()) {
    throw ContractViolation("seller_reward: quantity, price and cost vectors differ in length");
  }
  if (unsold < 0.0) throw ContractViolation("seller_reward: negative unsold quantity");
  double revenue = 0.0;
  for (std::size_t k = 0; k < qtys.size(); ++k) {
    revenue += qtys[k] * (prices[k] - transport_costs[k]);
  }
  return revenue - unsold * c_d;
}

double scarcity(std::span<const Buyer> buyers, std::span<const Seller> sellers) {
  double demand = 0.0;
  double supply = 0.0;
  for (const auto& b : buyers) demand += b.q_need;
  for (const auto& s : sellers) supply += s.q_supply;
  if (!(supply > 0.0)) throw DomainError("scarcity: total seller supply is zero");
  return demand / supply;
}

}  // namespace symbiosim
