#include "symbiosim/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "symbiosim/random.hpp"

namespace symbiosim {

namespace {
// Acceptance probability per draw is at least ~0.34 for cs <= 1.
constexpr int kMaxRedraws = 256;
}  // namespace

double LayoutSpec::width() const {
  return std::sqrt(static_cast<double>(n_firms) / rho);
}

DistanceMatrix distance_matrix(std::span<const Point2> buyers, std::span<const Point2> sellers) {
  DistanceMatrix dist(buyers.size(), sellers.size());
  for (std::size_t i = 0; i < buyers.size(); ++i) {
    for (std::size_t j = 0; j < sellers.size(); ++j) {
      dist(i, j) = std::hypot(buyers[i].x - sellers[j].x, buyers[i].y - sellers[j].y);
    }
  }
  return dist;
}

FirmLayout generate_layout(const LayoutSpec& spec, double buyer_fraction) {
  if (!(spec.rho > 0.0) || !std::isfinite(spec.rho)) {
    throw ConfigError("rho: must be > 0");
  }
  if (spec.n_firms < 2) throw ConfigError("n_firms: must be >= 2");
  if (spec.n_clusters < 1) throw ConfigError("n_clusters: must be >= 1");
  if (!(spec.cs >= 0.0 && spec.cs <= 1.0)) throw ConfigError("cs: must lie in [0, 1]");
  if (!(buyer_fraction > 0.0 && buyer_fraction < 1.0)) {
    throw ConfigError("buyer_fraction: must lie in (0, 1)");
  }
  const auto n_buyers = static_cast<std::size_t>(
      std::floor(buyer_fraction * static_cast<double>(spec.n_firms)));
  if (n_buyers < 1 || n_buyers >= spec.n_firms) {
    throw ConfigError("buyer_fraction: must leave at least one buyer and one seller");
  }

  const double width = spec.width();
  const double sigma = spec.cs * width;
  Rng rng = make_rng(spec.seed, "layout");
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Point2> centers(spec.n_clusters);
  for (auto& c : centers) {
    c.x = uniform(rng, 0.0, width);
    c.y = uniform(rng, 0.0, width);
  }

  // Each coordinate is redrawn until it falls inside the square, i.e. a
  // Gaussian truncated to [0, width]. A center always lies inside, so cs = 0
  // accepts on the first draw.
  auto coordinate = [&](double center) {
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      const double v = center + sigma * gauss(rng);
      if (v >= 0.0 && v <= width) return v;
    }
    return std::clamp(center + sigma * gauss(rng), 0.0, width);
  };
  std::vector<Point2> firms(spec.n_firms);
  for (std::size_t f = 0; f < spec.n_firms; ++f) {
    const Point2& c = centers[f % spec.n_clusters];
    firms[f].x = coordinate(c.x);
    firms[f].y = coordinate(c.y);
  }

  // Fisher-Yates over firm indices; written out so the role draw does not
  // depend on the standard library's shuffle implementation.
  std::vector<std::size_t> order(spec.n_firms);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t k = order.size() - 1; k > 0; --k) {
    const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k + 1));
    std::swap(order[k], order[std::min(pick, k)]);
  }

  FirmLayout layout;
  layout.width = width;
  std::vector<Point2> buyer_pos;
  std::vector<Point2> seller_pos;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const Point2& p = firms[order[r]];
    if (r < n_buyers) {
      layout.buyers.push_back(Buyer{.id = layout.buyers.size(), .position = p});
      buyer_pos.push_back(p);
    } else {
      layout.sellers.push_back(Seller{.id = layout.sellers.size(), .position = p});
      seller_pos.push_back(p);
    }
  }
  layout.dist = distance_matrix(buyer_pos, seller_pos);
  return layout;
}

nlohmann::json layout_to_json(const FirmLayout& layout, std::uint64_t seed) {
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["width"] = layout.width;
  auto& firms = doc["firms"] = nlohmann::json::array();
  for (const auto& b : layout.buyers) {
    firms.push_back({{"role", "buyer"},
                     {"id", b.id},
                     {"x", b.position.x},
                     {"y", b.position.y},
                     {"q_need", b.q_need},
                     {"beta", b.beta}});
  }
  for (const auto& s : layout.sellers) {
    firms.push_back({{"role", "seller"},
                     {"id", s.id},
                     {"x", s.position.x},
                     {"y", s.position.y},
                     {"q_supply", s.q_supply}});
  }
  return doc;
}

}  // namespace symbiosim
