#include "dvrp/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace dvrp {

namespace {

// Feasibility slack; tighter than the validator so accepted plans always validate.
double slack(double scale) {
  return 1e-9 * std::max(1.0, std::abs(scale));
}

}  // namespace

const char* to_string(VehicleStatus status) {
  switch (status) {
    case VehicleStatus::AtDepot: return "at-depot";
    case VehicleStatus::EnRoute: return "en-route";
    case VehicleStatus::Serving: return "serving";
    case VehicleStatus::IdleAtCustomer: return "idle";
    case VehicleStatus::Retired: return "retired";
  }
  return "unknown";
}

SimState SimState::reset(const Instance& inst, bool honor_reveals) {
  return reset(std::make_shared<const Instance>(inst), honor_reveals);
}

SimState SimState::reset(std::shared_ptr<const Instance> inst, bool honor_reveals) {
  SimState s;
  s.inst_ = std::move(inst);
  const auto& in = *s.inst_;
  s.vehicles_.resize(static_cast<std::size_t>(in.fleet().count));
  for (int k = 0; k < in.fleet().count; ++k) {
    auto& v = s.vehicles_[static_cast<std::size_t>(k)];
    v.id = k;
    v.location_now = in.depot();
    v.remaining_capacity = in.fleet().capacity;
  }
  s.status_.assign(in.size(), CustomerStatus::Active);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (honor_reveals && in.customer(i).reveal_time > 0.0) {
      s.status_[i] = CustomerStatus::Pending;
      s.pending_.push_back(i);
    } else {
      s.active_.insert(i);
    }
  }
  std::sort(s.pending_.begin(), s.pending_.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = in.customer(a);
    const auto& cb = in.customer(b);
    return ca.reveal_time != cb.reveal_time ? ca.reveal_time < cb.reveal_time : ca.id < cb.id;
  });
  s.drop_unservable();
  return s;
}

std::size_t SimState::count(CustomerStatus st) const {
  return static_cast<std::size_t>(std::count(status_.begin(), status_.end(), st));
}

bool SimState::is_free(int k) const {
  const auto& v = vehicle(k);
  return !v.retired() && !v.has_commitment();
}

bool SimState::is_waiting(int k) const {
  const auto& v = vehicle(k);
  return !v.retired() && v.trip.size() == v.completed + 1 && clock_ < v.trip.back().depart;
}

bool SimState::is_unused(int k) const {
  const auto& v = vehicle(k);
  return !v.retired() && v.trip.empty();
}

std::vector<int> SimState::free_vehicles() const {
  std::vector<int> out;
  for (const auto& v : vehicles_) {
    if (is_free(v.id)) {
      out.push_back(v.id);
    }
  }
  return out;
}

VehicleBase SimState::base(int k) const {
  const auto& v = vehicle(k);
  VehicleBase b;
  b.loc = v.location_now;
  b.at = v.last_customer;
  b.time = std::max(v.free_at, clock_);
  b.capacity = v.remaining_capacity;
  return b;
}

Projection SimState::project(int k, std::size_t i) const {
  const auto& in = instance();
  const auto b = base(k);
  const auto& c = in.customer(i);
  Projection p;
  p.leg = b.at ? in.dist(*b.at, i) : in.depot_dist(i);
  const double travel = p.leg / in.fleet().speed;
  p.arrival = std::max(b.time + travel, c.tw_min);
  // Leave no earlier than needed to arrive when the window opens.
  p.depart = p.arrival > b.time + travel ? p.arrival - travel : b.time;
  p.service_start = p.arrival;
  p.departure = p.service_start + c.service_duration;
  return p;
}

bool SimState::can_serve(int k, std::size_t i) const {
  const auto& v = vehicle(k);
  if (v.retired() || status_[i] != CustomerStatus::Active) {
    return false;
  }
  const auto& in = instance();
  const auto& c = in.customer(i);
  if (v.remaining_capacity + slack(in.fleet().capacity) < c.demand) {
    return false;
  }
  const auto b = base(k);
  const double leg = b.at ? in.dist(*b.at, i) : in.depot_dist(i);
  const double arrival = b.time + leg / in.fleet().speed;
  if (arrival > c.tw_max + slack(c.tw_max)) {
    return false;
  }
  if (in.depot_due()) {
    const double back = std::max(arrival, c.tw_min) + c.service_duration + in.depot_travel(i);
    if (back > *in.depot_due() + slack(*in.depot_due())) {
      return false;
    }
  }
  return true;
}

std::vector<Pair> SimState::feasible_pairs() const {
  std::vector<Pair> out;
  // Vehicles idle at the depot are interchangeable; test the first one only.
  std::vector<std::size_t> idle_ok;
  bool idle_seen = false;
  for (const auto& v : vehicles_) {
    if (v.retired()) {
      continue;
    }
    const bool idle = is_unused(v.id) && !v.has_commitment();
    if (idle && idle_seen) {
      for (auto i : idle_ok) {
        out.push_back({v.id, i});
      }
      continue;
    }
    for (auto i : active_) {
      if (can_serve(v.id, i)) {
        out.push_back({v.id, i});
        if (idle) {
          idle_ok.push_back(i);
        }
      }
    }
    idle_seen = idle_seen || idle;
  }
  return out;
}

std::optional<double> SimState::next_reveal() const {
  if (pending_pos_ == pending_.size()) {
    return std::nullopt;
  }
  return instance().customer(pending_[pending_pos_]).reveal_time;
}

void SimState::apply_assignment(int k, std::size_t i) {
  if (k < 0 || k >= static_cast<int>(vehicles_.size()) || i >= status_.size() || !can_serve(k, i)) {
    throw ContractViolation(fmt::format("infeasible assignment vehicle {} customer {}", k, i));
  }
  const auto& c = instance().customer(i);
  const auto p = project(k, i);
  auto& v = vehicles_[static_cast<std::size_t>(k)];

  PlannedVisit pv;
  pv.customer = i;
  pv.ready = std::max(v.free_at, clock_);
  pv.depart = p.depart;
  pv.arrival = p.arrival;
  pv.service_start = p.service_start;
  pv.departure = p.departure;
  v.trip.push_back(pv);

  v.free_at = p.departure;
  v.remaining_capacity = std::max(0.0, v.remaining_capacity - c.demand);
  v.location_now = c.loc;
  v.last_customer = i;
  ++v.visits_so_far;
  if (!v.committed_customer) {
    v.committed_customer = i;
  }
  status_[i] = CustomerStatus::Assigned;
  active_.erase(i);
  refresh_status(v);
  log("assign", k, i);
  drop_unservable();
}

void SimState::send_to_depot(int k) {
  auto& v = vehicles_.at(static_cast<std::size_t>(k));
  if (v.retired()) {
    throw ContractViolation(fmt::format("vehicle {} already retired", k));
  }
  if (!v.trip.empty()) {
    const double leave = std::max(v.free_at, clock_);
    v.depot_return = leave + distance(v.location_now, instance().depot()) / instance().fleet().speed;
  }
  v.status = VehicleStatus::Retired;
  log("depot", k, std::nullopt);
  drop_unservable();
}

void SimState::release_waiting(int k) {
  if (!is_waiting(k)) {
    throw ContractViolation(fmt::format("vehicle {} is not waiting", k));
  }
  auto& v = vehicles_[static_cast<std::size_t>(k)];
  const auto pv = v.trip.back();
  v.trip.pop_back();
  const auto& in = instance();
  v.remaining_capacity += in.customer(pv.customer).demand;
  v.free_at = pv.ready;
  --v.visits_so_far;
  v.committed_customer.reset();
  if (v.trip.empty()) {
    v.last_customer.reset();
    v.location_now = in.depot();
  } else {
    v.last_customer = v.trip.back().customer;
    v.location_now = in.customer(v.trip.back().customer).loc;
  }
  status_[pv.customer] = CustomerStatus::Active;
  active_.insert(pv.customer);
  refresh_status(v);
  log("release", k, pv.customer);
}

std::optional<Epoch> SimState::advance() {
  if (is_terminal()) {
    return std::nullopt;
  }
  double next = std::numeric_limits<double>::infinity();
  for (const auto& v : vehicles_) {
    if (!v.retired() && v.has_commitment()) {
      next = std::min(next, v.free_at);
    }
  }
  if (auto r = next_reveal()) {
    next = std::min(next, *r);
  }

  Epoch epoch;
  if (!std::isfinite(next)) {
    // Nothing scheduled, yet customers remain that an idle vehicle could
    // still take: let the idle vehicles decide again at the current time.
    epoch.time = clock_;
    for (const auto& v : vehicles_) {
      if (is_free(v.id)) {
        epoch.vehicles.push_back(v.id);
      }
    }
    if (epoch.vehicles.empty()) {
      return std::nullopt;
    }
    return epoch;
  }

  clock_ = std::max(clock_, next);
  epoch.time = clock_;

  for (auto& v : vehicles_) {
    if (v.retired()) {
      continue;
    }
    while (v.completed < v.trip.size() && v.trip[v.completed].departure <= clock_) {
      status_[v.trip[v.completed].customer] = CustomerStatus::Served;
      ++v.completed;
    }
    if (v.trip.size() > 0 && !v.has_commitment() && v.free_at <= clock_ && v.committed_customer) {
      v.committed_customer.reset();
      epoch.vehicles.push_back(v.id);
      log("free", v.id, std::nullopt);
    }
    refresh_status(v);
  }

  while (pending_pos_ < pending_.size() &&
         instance().customer(pending_[pending_pos_]).reveal_time <= clock_) {
    const auto i = pending_[pending_pos_++];
    status_[i] = CustomerStatus::Active;
    active_.insert(i);
    epoch.revealed = true;
    log("reveal", -1, i);
  }

  if (epoch.revealed) {
    for (auto& v : vehicles_) {
      if (is_waiting(v.id)) {
        release_waiting(v.id);
        epoch.released.push_back(v.id);
        epoch.vehicles.push_back(v.id);
      } else if (is_unused(v.id) && !v.has_commitment()) {
        epoch.vehicles.push_back(v.id);
      }
    }
  }
  std::sort(epoch.vehicles.begin(), epoch.vehicles.end());
  epoch.vehicles.erase(std::unique(epoch.vehicles.begin(), epoch.vehicles.end()),
                       epoch.vehicles.end());
  drop_unservable();
  return epoch;
}

bool SimState::is_terminal() const {
  for (const auto& v : vehicles_) {
    if (!v.retired() && v.has_commitment()) {
      return false;
    }
  }
  if (pending_count() == 0 && active_.empty()) {
    return true;
  }
  return std::all_of(vehicles_.begin(), vehicles_.end(),
                     [](const VehicleState& v) { return v.retired(); });
}

Solution SimState::finalize() {
  const auto& in = instance();
  // Anything still outstanding can no longer be served.
  for (std::size_t i = 0; i < status_.size(); ++i) {
    if (status_[i] == CustomerStatus::Pending || status_[i] == CustomerStatus::Active) {
      status_[i] = CustomerStatus::Dropped;
    }
  }
  active_.clear();
  pending_pos_ = pending_.size();

  std::vector<Route> routes;
  for (auto& v : vehicles_) {
    // Outstanding stops finish before the vehicle heads home.
    while (v.completed < v.trip.size()) {
      status_[v.trip[v.completed].customer] = CustomerStatus::Served;
      ++v.completed;
    }
    if (!v.retired()) {
      send_to_depot(v.id);
    }
    if (v.trip.empty()) {
      continue;
    }
    Route r;
    r.vehicle_id = v.id;
    r.depot_departure = v.trip.front().depart;
    r.depot_return = *v.depot_return;
    Location here = in.depot();
    for (const auto& pv : v.trip) {
      const auto& c = in.customer(pv.customer);
      r.visits.push_back({c.id, pv.arrival, pv.service_start, pv.departure});
      r.distance += distance(here, c.loc);
      r.load += c.demand;
      here = c.loc;
    }
    r.distance += distance(here, in.depot());
    routes.push_back(std::move(r));
  }
  return assemble_solution(in, std::move(routes));
}

SimState SimState::clone_for_soft() const {
  SimState copy = *this;
  copy.trace_ = nullptr;
  return copy;
}

bool SimState::optimistic_can_serve(const VehicleState& v, std::size_t i) const {
  const auto& in = instance();
  const auto& c = in.customer(i);
  // A waiting vehicle may still be released, so judge it from before its
  // deferred stop.
  double capacity = v.remaining_capacity;
  double time = std::max(v.free_at, clock_);
  std::optional<std::size_t> at = v.last_customer;
  if (!v.trip.empty() && v.trip.size() == v.completed + 1 && clock_ < v.trip.back().depart) {
    const auto& pv = v.trip.back();
    capacity += in.customer(pv.customer).demand;
    time = std::max(pv.ready, clock_);
    at = v.trip.size() > 1 ? std::optional<std::size_t>(v.trip[v.trip.size() - 2].customer)
                           : std::nullopt;
  }
  if (capacity + slack(in.fleet().capacity) < c.demand) {
    return false;
  }
  const double leg = at ? in.dist(*at, i) : in.depot_dist(i);
  const double arrival = time + leg / in.fleet().speed;
  if (arrival > c.tw_max + slack(c.tw_max)) {
    return false;
  }
  if (in.depot_due()) {
    const double back = std::max(arrival, c.tw_min) + c.service_duration + in.depot_travel(i);
    if (back > *in.depot_due() + slack(*in.depot_due())) {
      return false;
    }
  }
  return true;
}

void SimState::drop_unservable() {
  for (auto it = active_.begin(); it != active_.end();) {
    const auto i = *it;
    const bool servable = std::any_of(vehicles_.begin(), vehicles_.end(), [&](const VehicleState& v) {
      return !v.retired() && optimistic_can_serve(v, i);
    });
    if (servable) {
      ++it;
      continue;
    }
    status_[i] = CustomerStatus::Dropped;
    log("drop", -1, i);
    it = active_.erase(it);
  }
  const bool all_retired = std::all_of(vehicles_.begin(), vehicles_.end(),
                                       [](const VehicleState& v) { return v.retired(); });
  if (all_retired) {
    for (; pending_pos_ < pending_.size(); ++pending_pos_) {
      status_[pending_[pending_pos_]] = CustomerStatus::Dropped;
    }
  }
}

void SimState::refresh_status(VehicleState& v) const {
  if (v.retired()) {
    return;
  }
  const bool at_depot = v.completed == 0;
  if (!v.has_commitment()) {
    v.status = at_depot ? VehicleStatus::AtDepot : VehicleStatus::IdleAtCustomer;
    return;
  }
  const auto& next = v.trip[v.completed];
  if (clock_ < next.depart) {
    v.status = at_depot ? VehicleStatus::AtDepot : VehicleStatus::IdleAtCustomer;
  } else if (clock_ < next.arrival) {
    v.status = VehicleStatus::EnRoute;
  } else {
    v.status = VehicleStatus::Serving;
  }
}

void SimState::log(const char* kind, int vehicle, std::optional<std::size_t> customer) const {
  if (trace_ == nullptr) {
    return;
  }
  *trace_ << fmt::format("{:.6f} {} vehicle={} customer={}\n", clock_, kind, vehicle,
                         customer ? instance().customer(*customer).id : -1);
}

}  // namespace dvrp
