#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "dvrp/env.hpp"

namespace dvrp {

inline constexpr std::size_t kFeatureCount = 12;

// Network input for one vehicle/customer pair, always in this order.
enum Feature : std::size_t {
  kDistToCustomer = 0,
  kDemand,
  kCustomerToDepot,
  kInOutFlag,
  kVehicleToDepot,
  kSoleServer,
  kTimeNow,
  kRemainingCapacity,
  kCustomerTwMax,
  kNextNearestReachable,
  kNearestVehicleDist,
  kWaitTime,
};

using FeatureVector = std::array<double, kFeatureCount>;

// Normalizers: distances by the map diagonal, times by the horizon, loads by capacity.
double norm_dist(const Instance& inst);
double norm_time(const Instance& inst);

// Per-state quantities shared by every pair, computed once for a frozen state.
class FeatureContext {
 public:
  explicit FeatureContext(const SimState& s);

  const SimState& state() const { return *s_; }

  // Throws ContractViolation if (k, i) is not feasible.
  FeatureVector features(int k, std::size_t i) const;
  // Input used when vehicle k is sent back to the depot: the depot plays the
  // role of the proposed customer.
  FeatureVector depot_features(int k) const;

  // 1 iff no vehicle other than k can currently serve i.
  bool sole_server(int k, std::size_t i) const;
  // Raw distance from i to the closest non-retired vehicle with room for m_i.
  double nearest_vehicle_distance(std::size_t i) const;

 private:
  const SimState* s_;
  std::vector<std::vector<int>> servers_;  // feasible vehicles per customer index
  std::vector<double> nearest_vehicle_;
};

FeatureVector build_features(const SimState& s, int k, std::size_t i);

// Closest active customer j != i that k could still reach in its window and
// carry after serving i. Returns the index, or nullopt.
std::optional<std::size_t> next_reachable_customer(const SimState& s, std::size_t i, int k);

// Normalized distance to next_reachable_customer, 1.0 when there is none.
double nearest_reachable_after(const SimState& s, std::size_t i, int k);

}  // namespace dvrp
