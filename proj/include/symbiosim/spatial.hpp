#pragma once

// Clustered firm layouts in a square environment.

#include <cstdint>
#include <span>

#include <json.hpp>

#include "symbiosim/market.hpp"

namespace symbiosim {

struct LayoutSpec {
  std::size_t n_firms = 40;
  std::size_t n_clusters = 4;
  double rho = 0.001;  // firms per km^2
  double cs = 1.0;     // per-axis std-dev of cluster noise as a fraction of width
  std::uint64_t seed = 0;

  /// Side length of the square holding n_firms at density rho: sqrt(n_firms / rho).
  double width() const;
};

/// Places firms around uniformly drawn cluster centers (round-robin membership,
/// Gaussian noise of std-dev cs * width, redrawn per axis until inside the
/// square), then assigns the
/// first floor(buyer_fraction * n_firms) firms of a seeded shuffle to buyers.
/// Quantities and tolerances are left at their defaults; see build_population.
FirmLayout generate_layout(const LayoutSpec& spec, double buyer_fraction);

DistanceMatrix distance_matrix(std::span<const Point2> buyers, std::span<const Point2> sellers);

nlohmann::json layout_to_json(const FirmLayout& layout, std::uint64_t seed);

}  // namespace symbiosim
