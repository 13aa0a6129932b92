#pragma once

#include <cmath>
#include <vector>

#include "symbiosim/market.hpp"
#include "symbiosim/random.hpp"
#include "symbiosim/spatial.hpp"

namespace fixtures {

struct Firm {
  double x = 0.0;
  double y = 0.0;
  double qty = 0.0;
  double beta = 1.0;  // buyers only
};

inline symbiosim::FirmLayout make_layout(const std::vector<Firm>& buyers,
                                         const std::vector<Firm>& sellers) {
  symbiosim::FirmLayout l;
  std::vector<symbiosim::Point2> bp;
  std::vector<symbiosim::Point2> sp;
  for (const auto& b : buyers) {
    l.buyers.push_back({l.buyers.size(), {b.x, b.y}, b.qty, b.beta});
    bp.push_back({b.x, b.y});
  }
  for (const auto& s : sellers) {
    l.sellers.push_back({l.sellers.size(), {s.x, s.y}, s.qty, 1});
    sp.push_back({s.x, s.y});
  }
  l.dist = symbiosim::distance_matrix(bp, sp);
  l.width = 100.0;
  return l;
}

/// Small random market: integer quantities in [1, max_qty], positions on a
/// 0..50 grid, tolerances in [0.6, 1.4].
inline symbiosim::FirmLayout random_layout(symbiosim::Rng& rng, std::size_t nb, std::size_t ns,
                                           int max_qty) {
  auto draw_int = [&](int lo, int hi) {
    return lo + static_cast<int>(symbiosim::uniform01(rng) * (hi - lo + 1));
  };
  std::vector<Firm> buyers(nb);
  std::vector<Firm> sellers(ns);
  for (auto& b : buyers) {
    b = {static_cast<double>(draw_int(0, 50)), static_cast<double>(draw_int(0, 50)),
         static_cast<double>(draw_int(1, max_qty)), symbiosim::uniform(rng, 0.6, 1.4)};
  }
  for (auto& s : sellers) {
    s = {static_cast<double>(draw_int(0, 50)), static_cast<double>(draw_int(0, 50)),
         static_cast<double>(draw_int(1, max_qty))};
  }
  return make_layout(buyers, sellers);
}

}  // namespace fixtures
