#include "symbiosim/regret.hpp"

#include <algorithm>
#include <string>

namespace symbiosim {

double RegretRecord::mean_regret() const {
  if (per_seller_regret.empty()) return 0.0;
  return total_regret / static_cast<double>(per_seller_regret.size());
}

PayoffTable counterfactual_payoffs(const FirmLayout& layout, const MarketParams& params,
                                   std::span<const std::size_t> actions, const ActionGrid& grid) {
  const std::size_t ns = layout.sellers.size();
  if (actions.size() != ns) {
    throw ContractViolation("counterfactual_payoffs: expected " + std::to_string(ns) +
                            " actions, got " + std::to_string(actions.size()));
  }
  std::vector<double> phi(ns);
  for (std::size_t j = 0; j < ns; ++j) {
    if (actions[j] < 1 || actions[j] > grid.size()) {
      throw ContractViolation("counterfactual_payoffs: action index out of range");
    }
    phi[j] = grid.at(actions[j]);
  }

  const ClearingResult played = run_auction(layout, params, phi);
  PayoffTable table(ns, std::vector<double>(grid.size()));
  for (std::size_t j = 0; j < ns; ++j) {
    const double own = phi[j];
    for (std::size_t k = 1; k <= grid.size(); ++k) {
      if (k == actions[j]) {
        table[j][k - 1] = seller_reward_of(layout, params, played, j);
        continue;
      }
      phi[j] = grid.at(k);
      table[j][k - 1] = seller_reward_of(layout, params, run_auction(layout, params, phi), j);
    }
    phi[j] = own;
  }
  return table;
}

RegretRecord counterfactual_regret(const FirmLayout& layout, const MarketParams& params,
                                   std::span<const std::size_t> actions, const ActionGrid& grid,
                                   std::size_t t) {
  const PayoffTable table = counterfactual_payoffs(layout, params, actions, grid);
  RegretRecord rec;
  rec.t = t;
  const std::size_t ns = table.size();
  rec.per_seller_regret.resize(ns);
  rec.played_reward.resize(ns);
  rec.best_reward.resize(ns);
  for (std::size_t j = 0; j < ns; ++j) {
    rec.played_reward[j] = table[j][actions[j] - 1];
    rec.best_reward[j] = *std::max_element(table[j].begin(), table[j].end());
    rec.per_seller_regret[j] = rec.best_reward[j] - rec.played_reward[j];
    rec.total_regret += rec.per_seller_regret[j];
  }
  return rec;
}

std::vector<double> rolling_median(std::span<const double> series, std::size_t window) {
  if (window < 1) throw ContractViolation("rolling_median: window must be >= 1");
  std::vector<double> out(series.size());
  std::vector<double> buf;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    buf.assign(series.begin() + static_cast<std::ptrdiff_t>(lo),
               series.begin() + static_cast<std::ptrdiff_t>(i + 1));
    std::sort(buf.begin(), buf.end());
    const std::size_t n = buf.size();
    out[i] = n % 2 == 1 ? buf[n / 2] : 0.5 * (buf[n / 2 - 1] + buf[n / 2]);
  }
  return out;
}

}  // namespace symbiosim
