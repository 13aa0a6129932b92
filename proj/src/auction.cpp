#include "symbiosim/auction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace symbiosim {

namespace {

struct Ranked {
  std::size_t seller;
  double margin;
  double qty;
  std::size_t buyer;
  double price;
};

}  // namespace

ClearingResult run_auction(const FirmLayout& layout, const MarketParams& params,
                           std::span<const double> phi, const RoundObserver& observer) {
  const std::size_t nb = layout.buyers.size();
  const std::size_t ns = layout.sellers.size();
  if (phi.size() != ns) {
    throw ContractViolation("run_auction: expected " + std::to_string(ns) +
                            " seller actions, got " + std::to_string(phi.size()));
  }
  for (double v : phi) {
    if (!std::isfinite(v)) throw ContractViolation("run_auction: non-finite action");
  }

  std::vector<double> price(nb * ns);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      price[i * ns + j] = price_of(phi[j], params.p_m, layout.dist(i, j), params.c_t);
    }
  }
  std::vector<double> ceiling(nb);
  for (std::size_t i = 0; i < nb; ++i) ceiling[i] = layout.buyers[i].beta * params.p_m;

  ClearingResult out;
  out.unmet.resize(nb);
  out.unsold.resize(ns);
  for (std::size_t i = 0; i < nb; ++i) out.unmet[i] = layout.buyers[i].q_need;
  for (std::size_t j = 0; j < ns; ++j) out.unsold[j] = layout.sellers[j].q_supply;

  std::vector<std::size_t> buyers;
  std::vector<std::size_t> sellers;
  for (std::size_t i = 0; i < nb; ++i) {
    if (out.unmet[i] > 0.0) buyers.push_back(i);
  }
  for (std::size_t j = 0; j < ns; ++j) {
    if (out.unsold[j] > 0.0) sellers.push_back(j);
  }

  const std::size_t cap = nb + ns;
  std::vector<Ranked> ranked;
  ranked.reserve(nb);
  RoundTrace trace;

  while (true) {
    ++out.rounds;
    if (out.rounds > cap) {
      throw std::logic_error("run_auction: exceeded round cap of " + std::to_string(cap));
    }
    const std::size_t first_contract = out.contracts.size();

    ranked.clear();
    for (std::size_t i : buyers) {
      const double* row = price.data() + i * ns;
      std::size_t best = ns;
      double best_price = 0.0;
      for (std::size_t j : sellers) {
        const double p = row[j];
        if (p <= ceiling[i] && (best == ns || p < best_price)) {
          best = j;
          best_price = p;
        }
      }
      if (best == ns) continue;
      // unit_price - d_ij * c_t is phi_j * p_m for every buyer; taking it directly
      // keeps rounding noise from overriding the quantity tie-break.
      ranked.push_back(Ranked{best, phi[best] * params.p_m,
                              std::min(out.unmet[i], out.unsold[best]), i, best_price});
    }

    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.seller != b.seller) return a.seller < b.seller;
      if (a.margin != b.margin) return a.margin > b.margin;
      if (a.qty != b.qty) return a.qty > b.qty;
      return a.buyer < b.buyer;
    });

    for (const Ranked& r : ranked) {
      double& stock = out.unsold[r.seller];
      if (stock <= 0.0) continue;
      const double take = std::min(r.qty, stock);
      stock -= take;
      out.unmet[r.buyer] -= take;
      out.contracts.push_back(Contract{r.buyer, r.seller, take, r.price, out.rounds});
    }

    if (observer) {
      trace.round = out.rounds;
      trace.bids_considered = buyers.size() * sellers.size();
      trace.proposals.clear();
      for (const Ranked& r : ranked) {
        trace.proposals.push_back(Proposal{r.buyer, r.seller, r.qty, r.price});
      }
      trace.acceptances.assign(out.contracts.begin() + static_cast<std::ptrdiff_t>(first_contract),
                               out.contracts.end());
      observer(trace);
    }

    if (out.contracts.size() == first_contract) break;

    std::erase_if(buyers, [&](std::size_t i) { return out.unmet[i] <= 0.0; });
    std::erase_if(sellers, [&](std::size_t j) { return out.unsold[j] <= 0.0; });
  }
  return out;
}

double seller_reward_of(const FirmLayout& layout, const MarketParams& params,
                        const ClearingResult& result, std::size_t j) {
  std::vector<double> qtys;
  std::vector<double> prices;
  std::vector<double> costs;
  for (const Contract& c : result.contracts) {
    if (c.seller_id != j) continue;
    qtys.push_back(c.qty);
    prices.push_back(c.unit_price);
    costs.push_back(layout.dist(c.buyer_id, j) * params.c_t);
  }
  return seller_reward(qtys, prices, costs, result.unsold[j], params.c_d);
}

std::vector<double> seller_rewards(const FirmLayout& layout, const MarketParams& params,
                                   const ClearingResult& result) {
  std::vector<double> rewards(layout.sellers.size());
  for (std::size_t j = 0; j < rewards.size(); ++j) {
    rewards[j] = seller_reward_of(layout, params, result, j);
  }
  return rewards;
}

nlohmann::json to_json(const RoundTrace& trace) {
  nlohmann::json doc;
  doc["round"] = trace.round;
  doc["bids_considered"] = trace.bids_considered;
  auto& proposals = doc["proposals"] = nlohmann::json::array();
  for (const auto& p : trace.proposals) {
    proposals.push_back({{"buyer", p.buyer_id},
                         {"seller", p.seller_id},
                         {"qty", p.qty_requested},
                         {"unit_price", p.unit_price}});
  }
  auto& accepted = doc["acceptances"] = nlohmann::json::array();
  for (const auto& c : trace.acceptances) {
    accepted.push_back(
        {{"buyer", c.buyer_id}, {"seller", c.seller_id}, {"qty", c.qty}, {"unit_price", c.unit_price}});
  }
  return doc;
}

}  // namespace symbiosim
