#pragma once

// Domain types and closed-form pricing, reward and scarcity formulas shared
// by every other part of the simulator.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace symbiosim {

/// Invalid or inconsistent configuration (bad parameter ranges, empty populations).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (mismatched lengths, non-finite inputs).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A ratio with an empty denominator.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Every exogenous scalar of one market run.
struct MarketParams {
  double p_m = 100.0;   // reference market price
  double c_t = 0.1;     // transport cost per km per unit
  double c_d = 10.0;    // disposal penalty per unsold unit
  double s = 2.0;       // target scarcity (total demand / total supply)
  double rho = 0.001;   // firms per km^2
  double cs = 1.0;      // cluster spread, fraction of the environment width

  std::size_t n_firms = 40;
  std::size_t n_clusters = 4;
  double buyer_fraction = 0.5;
  std::pair<double, double> beta_range{0.8, 1.2};
  std::pair<double, double> demand_range{1.0, 10.0};

  std::size_t K = 30;
  double alpha = 0.9;
  double tau_0 = 0.5;
  double tau_min = 0.01;
  double decay = 0.996;

  std::size_t horizon = 1000;
  std::uint64_t seed = 0;

  std::size_t n_buyers() const;
  std::size_t n_sellers() const;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

struct Buyer {
  std::size_t id = 0;
  Point2 position;
  double q_need = 0.0;  // per-timestep demand
  double beta = 1.0;    // accepts unit prices up to beta * p_m
};

struct Seller {
  std::size_t id = 0;
  Point2 position;
  double q_supply = 0.0;      // per-timestep endowment
  std::size_t phi_index = 1;  // 1-based action-grid index
};

/// Dense row-major matrix of buyer-to-seller distances, indexed (buyer, seller).
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct FirmLayout {
  std::vector<Buyer> buyers;
  std::vector<Seller> sellers;
  DistanceMatrix dist;
  double width = 0.0;  // side of the square environment, km
};

struct Contract {
  std::size_t buyer_id = 0;
  std::size_t seller_id = 0;
  double qty = 0.0;
  double unit_price = 0.0;
  std::size_t round = 0;

  friend bool operator==(const Contract&, const Contract&) = default;
};

/// Delivered unit price offered by a seller playing `phi` to a buyer `d_ij` km away.
inline double price_of(double phi, double p_m, double d_ij, double c_t) {
  return phi * p_m + d_ij * c_t;
}

/// Net revenue of the executed contracts minus the disposal penalty on unsold units.
double seller_reward(std::span<const double> qtys, std::span<const double> prices,
                     std::span<const double> transport_costs, double unsold, double c_d);

/// Total buyer demand over total seller supply. Throws DomainError on zero supply.
double scarcity(std::span<const Buyer> buyers, std::span<const Seller> sellers);

}  // namespace symbiosim
