#include "dvrp/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

namespace dvrp {

double norm_dist(const Instance& inst) {
  return inst.diagonal();
}

double norm_time(const Instance& inst) {
  return inst.horizon() > 0.0 ? inst.horizon() : 1.0;
}

FeatureContext::FeatureContext(const SimState& s) : s_(&s) {
  const auto& in = s.instance();
  servers_.resize(in.size());
  nearest_vehicle_.assign(in.size(), std::numeric_limits<double>::infinity());
  // Vehicles idle at the depot share one answer to every feasibility test.
  std::optional<int> idle_rep;
  for (const auto& v : s.vehicles()) {
    if (s.is_unused(v.id) && !v.has_commitment()) {
      idle_rep = v.id;
      break;
    }
  }
  for (auto i : s.active()) {
    const auto& c = in.customer(i);
    const bool idle_ok = idle_rep && s.can_serve(*idle_rep, i);
    for (const auto& v : s.vehicles()) {
      if (v.retired()) {
        continue;
      }
      const bool idle = s.is_unused(v.id) && !v.has_commitment();
      if (idle ? idle_ok : s.can_serve(v.id, i)) {
        servers_[i].push_back(v.id);
      }
      if (v.remaining_capacity + 1e-9 * in.fleet().capacity >= c.demand) {
        nearest_vehicle_[i] = std::min(nearest_vehicle_[i], distance(v.location_now, c.loc));
      }
    }
  }
}

bool FeatureContext::sole_server(int k, std::size_t i) const {
  const auto& sv = servers_[i];
  return std::none_of(sv.begin(), sv.end(), [k](int other) { return other != k; });
}

double FeatureContext::nearest_vehicle_distance(std::size_t i) const {
  return nearest_vehicle_[i];
}

FeatureVector FeatureContext::features(int k, std::size_t i) const {
  const auto& s = *s_;
  if (i >= s.instance().size() || !s.can_serve(k, i)) {
    throw ContractViolation(fmt::format("features requested for infeasible pair ({}, {})", k, i));
  }
  const auto& in = s.instance();
  const auto& c = in.customer(i);
  const auto& v = s.vehicle(k);
  const double D = norm_dist(in);
  const double tau = norm_time(in);
  const auto p = s.project(k, i);
  const double unwaited = std::max(v.free_at, s.clock()) + p.leg / in.fleet().speed;

  FeatureVector f{};
  f[kDistToCustomer] = p.leg / D;
  f[kDemand] = c.demand / in.fleet().capacity;
  f[kCustomerToDepot] = in.depot_dist(i) / D;
  f[kInOutFlag] = s.clock() > tau / 2.0 ? 1.0 : 0.0;
  f[kVehicleToDepot] = distance(v.location_now, in.depot()) / D;
  f[kSoleServer] = sole_server(k, i) ? 1.0 : 0.0;
  f[kTimeNow] = s.clock() / tau;
  f[kRemainingCapacity] = v.remaining_capacity / in.fleet().capacity;
  f[kCustomerTwMax] = c.tw_max / tau;
  f[kNextNearestReachable] = nearest_reachable_after(s, i, k);
  f[kNearestVehicleDist] = nearest_vehicle_[i] / D;
  f[kWaitTime] = std::max(c.tw_min - unwaited, 0.0) / tau;
  return f;
}

FeatureVector FeatureContext::depot_features(int k) const {
  const auto& s = *s_;
  const auto& in = s.instance();
  const auto& v = s.vehicle(k);
  const double D = norm_dist(in);
  const double tau = norm_time(in);
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& other : s.vehicles()) {
    if (!other.retired()) {
      nearest = std::min(nearest, distance(other.location_now, in.depot()));
    }
  }
  if (!std::isfinite(nearest)) {
    nearest = 0.0;
  }
  const double back = distance(v.location_now, in.depot());
  FeatureVector f{};
  f[kDistToCustomer] = back / D;
  f[kDemand] = 0.0;
  f[kCustomerToDepot] = 0.0;
  f[kInOutFlag] = s.clock() > tau / 2.0 ? 1.0 : 0.0;
  f[kVehicleToDepot] = back / D;
  f[kSoleServer] = 0.0;
  f[kTimeNow] = s.clock() / tau;
  f[kRemainingCapacity] = v.remaining_capacity / in.fleet().capacity;
  f[kCustomerTwMax] = in.depot_due() ? *in.depot_due() / tau : 1.0;
  f[kNextNearestReachable] = 1.0;
  f[kNearestVehicleDist] = nearest / D;
  f[kWaitTime] = 0.0;
  return f;
}

FeatureVector build_features(const SimState& s, int k, std::size_t i) {
  return FeatureContext(s).features(k, i);
}

std::optional<std::size_t> next_reachable_customer(const SimState& s, std::size_t i, int k) {
  const auto& in = s.instance();
  const auto p = s.project(k, i);
  const double capacity_after = s.vehicle(k).remaining_capacity - in.customer(i).demand;
  // Neighbours come closest first, so the first match is the answer.
  for (auto j : in.neighbours(i)) {
    if (j == i || s.status(j) != CustomerStatus::Active) {
      continue;
    }
    const auto& cj = in.customer(j);
    if (capacity_after + 1e-9 * in.fleet().capacity < cj.demand) {
      continue;
    }
    const double d = in.dist(i, j);
    if (p.departure + d / in.fleet().speed > cj.tw_max + 1e-9 * std::max(1.0, cj.tw_max)) {
      continue;
    }
    return j;
  }
  return std::nullopt;
}

double nearest_reachable_after(const SimState& s, std::size_t i, int k) {
  const auto j = next_reachable_customer(s, i, k);
  return j ? s.instance().dist(i, *j) / norm_dist(s.instance()) : 1.0;
}

}  // namespace dvrp
