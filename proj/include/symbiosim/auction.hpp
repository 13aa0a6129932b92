#pragma once

// One timestep of the decentralized multilateral auction.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "symbiosim/market.hpp"

namespace symbiosim {

struct Bid {
  std::size_t seller_id = 0;
  std::size_t buyer_id = 0;
  double qty_available = 0.0;
  double unit_price = 0.0;
};

struct Proposal {
  std::size_t buyer_id = 0;
  std::size_t seller_id = 0;
  double qty_requested = 0.0;
  double unit_price = 0.0;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct ClearingResult {
  std::vector<Contract> contracts;
  std::vector<double> unsold;  // per seller
  std::vector<double> unmet;   // per buyer
  std::size_t rounds = 0;

  friend bool operator==(const ClearingResult&, const ClearingResult&) = default;
};

struct RoundTrace {
  std::size_t round = 0;
  std::size_t bids_considered = 0;
  std::vector<Proposal> proposals;
  std::vector<Contract> acceptances;
};

using RoundObserver = std::function<void(const RoundTrace&)>;

/// Clears one timestep from full endowments. Rounds repeat until one executes
/// no contract. In each round every active buyer proposes to its cheapest seller
/// within tolerance (lower seller id on ties) for min(need, seller stock), and
/// every seller accepts proposals by margin, then larger quantity, then lower
/// buyer id, truncating the last one to its remaining stock.
///
/// `phi` holds one price multiplier per seller. Throws ContractViolation on a
/// length mismatch or a non-finite multiplier.
ClearingResult run_auction(const FirmLayout& layout, const MarketParams& params,
                           std::span<const double> phi, const RoundObserver& observer = {});

/// Reward of seller `j` for a cleared market: contract margins net of transport
/// minus the disposal penalty on its unsold stock.
double seller_reward_of(const FirmLayout& layout, const MarketParams& params,
                        const ClearingResult& result, std::size_t j);

std::vector<double> seller_rewards(const FirmLayout& layout, const MarketParams& params,
                                   const ClearingResult& result);

nlohmann::json to_json(const RoundTrace& trace);

}  // namespace symbiosim
