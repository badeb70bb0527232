#include "dvrp/core.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace dvrp {

double distance(Location a, Location b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Instance::Instance(std::string name, Location depot,
                   std::optional<double> depot_due,
                   std::vector<Customer> customers, FleetSpec fleet)
  : name_(std::move(name)),
    depot_(depot),
    depot_due_(depot_due),
    customers_(std::move(customers)),
    fleet_(fleet) {
  if (fleet_.count < 1 || !(fleet_.capacity > 0.0) || !(fleet_.speed > 0.0)) {
    throw std::invalid_argument("fleet needs count >= 1, capacity > 0, speed > 0");
  }
  if (!std::isfinite(depot_.x) || !std::isfinite(depot_.y)) {
    throw std::invalid_argument("depot coordinates must be finite");
  }
  if (depot_due_ && !(*depot_due_ >= 0.0)) {
    throw std::invalid_argument("depot due date must be nonnegative");
  }

  double min_x = depot_.x, max_x = depot_.x;
  double min_y = depot_.y, max_y = depot_.y;
  double latest = 0.0;
  for (std::size_t i = 0; i < customers_.size(); ++i) {
    const auto& c = customers_[i];
    if (!std::isfinite(c.loc.x) || !std::isfinite(c.loc.y)) {
      throw std::invalid_argument(fmt::format("customer {}: non-finite location", c.id));
    }
    if (!(c.demand >= 0.0) || !(c.reveal_time >= 0.0) || !(c.tw_min >= 0.0) ||
        !(c.service_duration >= 0.0)) {
      throw std::invalid_argument(
        fmt::format("customer {}: demand, window, service and reveal must be nonnegative", c.id));
    }
    if (!(c.tw_min < c.tw_max)) {
      throw std::invalid_argument(fmt::format("customer {}: tw_min must be < tw_max", c.id));
    }
    if (!index_.emplace(c.id, i).second) {
      throw std::invalid_argument(fmt::format("duplicate customer id {}", c.id));
    }
    min_x = std::min(min_x, c.loc.x);
    max_x = std::max(max_x, c.loc.x);
    min_y = std::min(min_y, c.loc.y);
    max_y = std::max(max_y, c.loc.y);
    latest = std::max(latest, c.tw_max);
  }
  horizon_ = depot_due_ ? *depot_due_ : latest;
  diagonal_ = std::hypot(max_x - min_x, max_y - min_y);
  // Degenerate map (every location identical); any positive scale works.
  if (!(diagonal_ > 0.0)) {
    diagonal_ = 1.0;
  }

  const auto n = customers_.size();
  dist_.resize(n * n);
  depot_dist_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    depot_dist_[i] = distance(depot_, customers_[i].loc);
    for (std::size_t j = 0; j < n; ++j) {
      dist_[i * n + j] = distance(customers_[i].loc, customers_[j].loc);
    }
  }
  neighbours_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = neighbours_.begin() + static_cast<std::ptrdiff_t>(i * n);
    std::iota(row, row + static_cast<std::ptrdiff_t>(n), 0u);
    std::stable_sort(row, row + static_cast<std::ptrdiff_t>(n),
                     [&](std::uint32_t a, std::uint32_t b) { return dist_[i * n + a] < dist_[i * n + b]; });
  }
}

std::optional<std::size_t> Instance::index_of(int id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

bool Instance::has_dynamic_customers() const {
  return std::any_of(customers_.begin(), customers_.end(),
                     [](const Customer& c) { return c.reveal_time > 0.0; });
}

std::size_t Solution::served_count() const {
  std::size_t n = 0;
  for (const auto& r : routes) {
    n += r.visits.size();
  }
  return n;
}

Solution assemble_solution(const Instance& inst, std::vector<Route> routes,
                           double wall_time_sec) {
  Solution sol;
  std::erase_if(routes, [](const Route& r) { return r.empty(); });
  std::sort(routes.begin(), routes.end(),
            [](const Route& a, const Route& b) { return a.vehicle_id < b.vehicle_id; });

  std::set<int> served;
  for (const auto& r : routes) {
    sol.total_distance += r.distance;
    for (const auto& v : r.visits) {
      served.insert(v.customer_id);
    }
  }
  for (const auto& c : inst.customers()) {
    if (!served.contains(c.id)) {
      sol.unserved.insert(c.id);
    }
  }
  sol.vehicles_used = static_cast<int>(routes.size());
  sol.fulfilment = inst.size() == 0
                     ? 1.0
                     : static_cast<double>(served.size()) / static_cast<double>(inst.size());
  sol.routes = std::move(routes);
  sol.wall_time_sec = wall_time_sec;
  return sol;
}

Route schedule_route(const Instance& inst, int vehicle_id,
                     std::span<const std::size_t> sequence) {
  Route route;
  route.vehicle_id = vehicle_id;
  if (sequence.empty()) {
    return route;
  }
  const auto& first = inst.customer(sequence.front());
  route.depot_departure = std::max(0.0, first.tw_min - inst.depot_travel(sequence.front()));

  double clock = route.depot_departure;
  std::size_t prev = 0;
  bool at_depot = true;
  for (auto idx : sequence) {
    const auto& c = inst.customer(idx);
    const double leg = at_depot ? inst.depot_dist(idx) : inst.dist(prev, idx);
    Visit v;
    v.customer_id = c.id;
    v.arrival = clock + leg / inst.fleet().speed;
    v.service_start = std::max(v.arrival, c.tw_min);
    v.departure = v.service_start + c.service_duration;
    route.visits.push_back(v);
    route.distance += leg;
    route.load += c.demand;
    clock = v.departure;
    prev = idx;
    at_depot = false;
  }
  route.distance += inst.depot_dist(prev);
  route.depot_return = clock + inst.depot_travel(prev);
  return route;
}

RouteMetrics route_metrics(const Instance& inst, const Route& route) {
  RouteMetrics m;
  if (route.visits.empty()) {
    return m;
  }
  Location here = inst.depot();
  for (const auto& v : route.visits) {
    auto idx = inst.index_of(v.customer_id);
    if (!idx) {
      throw StructureError(fmt::format("route references unknown customer {}", v.customer_id));
    }
    const auto& c = inst.customer(*idx);
    m.distance += distance(here, c.loc);
    m.load += c.demand;
    here = c.loc;
  }
  m.distance += distance(here, inst.depot());
  m.duration = route.depot_return - route.depot_departure;
  return m;
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Uniqueness: return "uniqueness";
    case ConstraintKind::TimeWindow: return "time-window";
    case ConstraintKind::FlowContinuity: return "flow-continuity";
    case ConstraintKind::DepotReturn: return "depot-return";
    case ConstraintKind::Capacity: return "capacity";
    case ConstraintKind::TravelTime: return "travel-time";
    case ConstraintKind::DepotDue: return "depot-due";
    case ConstraintKind::Aggregate: return "aggregate";
  }
  return "unknown";
}

bool ValidationReport::has(ConstraintKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  if (ok()) {
    return "ok";
  }
  std::ostringstream out;
  for (const auto& v : violations) {
    out << to_string(v.kind);
    if (v.vehicle_id >= 0) {
      out << " vehicle=" << v.vehicle_id;
    }
    if (v.customer_id) {
      out << " customer=" << *v.customer_id;
    }
    out << ": " << v.detail << '\n';
  }
  return out.str();
}

namespace {

bool close(double a, double b, double scale = 1.0) {
  return std::abs(a - b) <= kTolerance * std::max(1.0, scale);
}

}  // namespace

ValidationReport validate_solution(const Instance& inst, const Solution& sol) {
  ValidationReport report;
  auto fail = [&](ConstraintKind kind, int vehicle, std::optional<int> customer,
                  std::string detail) {
    report.violations.push_back({kind, vehicle, customer, std::move(detail)});
  };

  // Structural pass first: everything must resolve against the instance.
  for (const auto& r : sol.routes) {
    if (r.vehicle_id < 0 || r.vehicle_id >= inst.fleet().count) {
      throw StructureError(fmt::format("route uses unknown vehicle {}", r.vehicle_id));
    }
    for (const auto& v : r.visits) {
      if (!inst.index_of(v.customer_id)) {
        throw StructureError(fmt::format("route references unknown customer {}", v.customer_id));
      }
    }
  }
  for (int id : sol.unserved) {
    if (!inst.index_of(id)) {
      throw StructureError(fmt::format("unserved set references unknown customer {}", id));
    }
  }

  std::vector<int> seen(inst.size(), 0);
  std::set<int> vehicles;
  const double speed = inst.fleet().speed;
  double total = 0.0;
  int used = 0;

  for (const auto& r : sol.routes) {
    if (!vehicles.insert(r.vehicle_id).second) {
      fail(ConstraintKind::FlowContinuity, r.vehicle_id, std::nullopt,
           "vehicle performs more than one trip");
    }
    total += r.distance;
    if (r.visits.empty()) {
      if (!close(r.distance, 0.0) || !close(r.load, 0.0)) {
        fail(ConstraintKind::DepotReturn, r.vehicle_id, std::nullopt,
             "empty route with nonzero distance or load");
      }
      continue;
    }
    ++used;

    if (r.depot_departure < -kTolerance) {
      fail(ConstraintKind::TravelTime, r.vehicle_id, std::nullopt,
           "depot departure before time zero");
    }

    Location here = inst.depot();
    double ready = r.depot_departure;
    double load = 0.0;
    double legs = 0.0;
    for (const auto& v : r.visits) {
      const auto idx = *inst.index_of(v.customer_id);
      const auto& c = inst.customer(idx);
      ++seen[idx];

      const double leg = distance(here, c.loc);
      legs += leg;
      load += c.demand;
      const double scale = std::max({std::abs(v.arrival), std::abs(ready), 1.0});
      if (v.arrival + kTolerance * scale < ready + leg / speed) {
        fail(ConstraintKind::TravelTime, r.vehicle_id, c.id,
             fmt::format("arrival {} earlier than reachable {}", v.arrival, ready + leg / speed));
      }
      if (v.service_start + kTolerance * std::max(1.0, std::abs(c.tw_min)) < c.tw_min ||
          v.service_start > c.tw_max + kTolerance * std::max(1.0, std::abs(c.tw_max))) {
        fail(ConstraintKind::TimeWindow, r.vehicle_id, c.id,
             fmt::format("service start {} outside [{}, {}]", v.service_start, c.tw_min, c.tw_max));
      }
      if (!close(v.service_start, std::max(v.arrival, c.tw_min), std::abs(v.service_start)) ||
          !close(v.departure, v.service_start + c.service_duration, std::abs(v.departure))) {
        fail(ConstraintKind::FlowContinuity, r.vehicle_id, c.id,
             "visit timestamps inconsistent with waiting and service duration");
      }
      here = c.loc;
      ready = v.departure;
    }

    const double back = distance(here, inst.depot());
    legs += back;
    if (r.depot_return + kTolerance * std::max(1.0, std::abs(ready)) < ready + back / speed) {
      fail(ConstraintKind::DepotReturn, r.vehicle_id, std::nullopt,
           "depot return earlier than the final leg allows");
    }
    if (!close(r.distance, legs, legs)) {
      fail(ConstraintKind::DepotReturn, r.vehicle_id, std::nullopt,
           fmt::format("recorded distance {} differs from leg sum {}", r.distance, legs));
    }
    if (load > inst.fleet().capacity + kTolerance * std::max(1.0, inst.fleet().capacity)) {
      fail(ConstraintKind::Capacity, r.vehicle_id, std::nullopt,
           fmt::format("load {} exceeds capacity {}", load, inst.fleet().capacity));
    }
    if (!close(r.load, load, load)) {
      fail(ConstraintKind::Capacity, r.vehicle_id, std::nullopt,
           fmt::format("recorded load {} differs from demand sum {}", r.load, load));
    }
    if (inst.depot_due() &&
        r.depot_return > *inst.depot_due() + kTolerance * std::max(1.0, *inst.depot_due())) {
      fail(ConstraintKind::DepotDue, r.vehicle_id, std::nullopt,
           fmt::format("returns at {} after depot due {}", r.depot_return, *inst.depot_due()));
    }
  }

  for (std::size_t i = 0; i < inst.size(); ++i) {
    const int id = inst.customer(i).id;
    const bool listed = sol.unserved.contains(id);
    if (seen[i] > 1) {
      fail(ConstraintKind::Uniqueness, -1, id, "customer visited more than once");
    } else if (seen[i] == 1 && listed) {
      fail(ConstraintKind::Uniqueness, -1, id, "customer both served and listed unserved");
    } else if (seen[i] == 0 && !listed) {
      fail(ConstraintKind::Uniqueness, -1, id, "customer neither served nor listed unserved");
    }
  }

  if (!close(sol.total_distance, total, total)) {
    fail(ConstraintKind::Aggregate, -1, std::nullopt, "total distance differs from route sum");
  }
  if (sol.vehicles_used != used) {
    fail(ConstraintKind::Aggregate, -1, std::nullopt, "vehicle count differs from nonempty routes");
  }
  const std::size_t served =
    static_cast<std::size_t>(std::count_if(seen.begin(), seen.end(), [](int s) { return s > 0; }));
  const double expected_f =
    inst.size() == 0 ? 1.0 : static_cast<double>(served) / static_cast<double>(inst.size());
  if (!close(sol.fulfilment, expected_f)) {
    fail(ConstraintKind::Aggregate, -1, std::nullopt, "fulfilment differs from served ratio");
  }
  return report;
}

}  // namespace dvrp
