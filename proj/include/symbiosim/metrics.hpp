#pragma once

#include <optional>
#include <span>

#include "symbiosim/auction.hpp"
#include "symbiosim/market.hpp"

namespace symbiosim {

struct MarketAggregates {
  double q_bought = 0.0;
  double q_toSell = 0.0;
  double q_needed = 0.0;
  std::optional<double> mean_price;
};

/// q_bought / min(q_toSell, q_needed); 1 when the smaller side is empty.
/// Throws ContractViolation on negative inputs.
double symbiosis_index(double q_bought, double q_toSell, double q_needed);

/// Quantity-weighted mean unit price; empty when there are no contracts.
std::optional<double> weighted_mean_price(std::span<const Contract> contracts);

MarketAggregates aggregate(const FirmLayout& layout, const ClearingResult& result);

}  // namespace symbiosim
