#pragma once

// Counterfactual per-step regret by replaying the auction with one seller's
// action swapped and every other seller held fixed.

#include <cstddef>
#include <span>
#include <vector>

#include "symbiosim/auction.hpp"
#include "symbiosim/learning.hpp"

namespace symbiosim {

struct RegretRecord {
  std::size_t t = 0;
  std::vector<double> per_seller_regret;
  std::vector<double> played_reward;  // replayed reward of the action actually played
  std::vector<double> best_reward;
  double total_regret = 0.0;

  double mean_regret() const;

  friend bool operator==(const RegretRecord&, const RegretRecord&) = default;
};

/// payoff[j][k-1]: seller j's reward had it played arm k, others unchanged.
using PayoffTable = std::vector<std::vector<double>>;

PayoffTable counterfactual_payoffs(const FirmLayout& layout, const MarketParams& params,
                                   std::span<const std::size_t> actions, const ActionGrid& grid);

/// `actions` are 1-based grid indices, one per seller.
RegretRecord counterfactual_regret(const FirmLayout& layout, const MarketParams& params,
                                   std::span<const std::size_t> actions, const ActionGrid& grid,
                                   std::size_t t = 0);

/// Trailing-window median; the first window-1 entries use the available prefix.
std::vector<double> rolling_median(std::span<const double> series, std::size_t window);

}  // namespace symbiosim
