#include "symbiosim/metrics.hpp"

#include <algorithm>

namespace symbiosim {

double symbiosis_index(double q_bought, double q_toSell, double q_needed) {
  if (q_bought < 0.0 || q_toSell < 0.0 || q_needed < 0.0) {
    throw ContractViolation("symbiosis_index: quantities must be >= 0");
  }
  const double feasible = std::min(q_toSell, q_needed);
  if (feasible == 0.0) return 1.0;
  return q_bought / feasible;
}

std::optional<double> weighted_mean_price(std::span<const Contract> contracts) {
  double qty = 0.0;
  double value = 0.0;
  for (const auto& c : contracts) {
    qty += c.qty;
    value += c.qty * c.unit_price;
  }
  if (contracts.empty() || qty <= 0.0) return std::nullopt;
  return value / qty;
}

MarketAggregates aggregate(const FirmLayout& layout, const ClearingResult& result) {
  MarketAggregates agg;
  for (const auto& c : result.contracts) agg.q_bought += c.qty;
  for (const auto& s : layout.sellers) agg.q_toSell += s.q_supply;
  for (const auto& b : layout.buyers) agg.q_needed += b.q_need;
  agg.mean_price = weighted_mean_price(result.contracts);
  return agg;
}

}  // namespace symbiosim
