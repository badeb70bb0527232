#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dvrp {

// Tolerance for all time and load comparisons.
inline constexpr double kTolerance = 1e-6;

// Broken precondition on an operation (infeasible pair, wrong input size...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A solution that references something the instance does not know about.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Location {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Location&, const Location&) = default;
};

double distance(Location a, Location b);

struct Customer {
  int id = 0;
  Location loc;
  double demand = 0.0;
  double tw_min = 0.0;
  double tw_max = 0.0;
  double service_duration = 0.0;
  double reveal_time = 0.0;

  friend bool operator==(const Customer&, const Customer&) = default;
};

struct FleetSpec {
  int count = 1;
  double capacity = 1.0;
  double speed = 1.0;

  friend bool operator==(const FleetSpec&, const FleetSpec&) = default;
};

// Immutable problem description. Customers are addressed internally by their
// position in customers() ("index"); ids are only used at the boundary.
class Instance {
 public:
  Instance() = default;
  Instance(std::string name, Location depot, std::optional<double> depot_due,
           std::vector<Customer> customers, FleetSpec fleet);

  const std::string& name() const { return name_; }
  Location depot() const { return depot_; }
  const std::optional<double>& depot_due() const { return depot_due_; }
  const std::vector<Customer>& customers() const { return customers_; }
  const Customer& customer(std::size_t idx) const { return customers_[idx]; }
  std::size_t size() const { return customers_.size(); }
  const FleetSpec& fleet() const { return fleet_; }

  // Latest customer window end, or the depot due date when present.
  double horizon() const { return horizon_; }
  // Diagonal of the bounding box of every location including the depot.
  double diagonal() const { return diagonal_; }

  std::optional<std::size_t> index_of(int id) const;

  double dist(std::size_t i, std::size_t j) const { return dist_[i * size() + j]; }
  double depot_dist(std::size_t i) const { return depot_dist_[i]; }
  double travel(std::size_t i, std::size_t j) const { return dist(i, j) / fleet_.speed; }
  double depot_travel(std::size_t i) const { return depot_dist_[i] / fleet_.speed; }
  // Every customer index ordered by distance from i, ties by index.
  std::span<const std::uint32_t> neighbours(std::size_t i) const {
    return {neighbours_.data() + i * size(), size()};
  }

  bool has_dynamic_customers() const;

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.name_ == b.name_ && a.depot_ == b.depot_ &&
           a.depot_due_ == b.depot_due_ && a.customers_ == b.customers_ &&
           a.fleet_ == b.fleet_;
  }

 private:
  std::string name_;
  Location depot_;
  std::optional<double> depot_due_;
  std::vector<Customer> customers_;
  FleetSpec fleet_;
  double horizon_ = 0.0;
  double diagonal_ = 1.0;
  std::unordered_map<int, std::size_t> index_;
  std::vector<double> dist_;
  std::vector<double> depot_dist_;
  std::vector<std::uint32_t> neighbours_;
};

struct Visit {
  int customer_id = 0;
  double arrival = 0.0;
  double service_start = 0.0;
  double departure = 0.0;

  friend bool operator==(const Visit&, const Visit&) = default;
};

struct Route {
  int vehicle_id = 0;
  std::vector<Visit> visits;
  double depot_departure = 0.0;
  double depot_return = 0.0;
  double load = 0.0;
  double distance = 0.0;

  bool empty() const { return visits.empty(); }
  friend bool operator==(const Route&, const Route&) = default;
};

struct Solution {
  std::vector<Route> routes;
  std::set<int> unserved;
  double total_distance = 0.0;
  int vehicles_used = 0;
  double fulfilment = 1.0;
  double wall_time_sec = 0.0;

  std::size_t served_count() const;
  friend bool operator==(const Solution&, const Solution&) = default;
};

// Builds a Solution from routes: fills unserved, distance, vehicle count and
// fulfilment. Empty routes are dropped.
Solution assemble_solution(const Instance& inst, std::vector<Route> routes,
                           double wall_time_sec = 0.0);

// Earliest-time schedule for a sequence of customer indices. The vehicle waits
// at the depot so that it never idles at the first customer; afterwards it
// leaves each customer as soon as service ends.
Route schedule_route(const Instance& inst, int vehicle_id,
                     std::span<const std::size_t> sequence);

struct RouteMetrics {
  double distance = 0.0;
  double load = 0.0;
  double duration = 0.0;
};

RouteMetrics route_metrics(const Instance& inst, const Route& route);

enum class ConstraintKind {
  Uniqueness,      // each customer served once or listed unserved
  TimeWindow,      // service start inside [tw_min, tw_max]
  FlowContinuity,  // one trip per vehicle, consistent visit timestamps
  DepotReturn,     // every trip closes at the depot with the recorded length
  Capacity,        // route load within vehicle capacity
  TravelTime,      // legs respect travel time at fleet speed
  DepotDue,        // return before the depot due date
  Aggregate,       // solution-level totals match their routes
};

const char* to_string(ConstraintKind kind);

struct Violation {
  ConstraintKind kind;
  int vehicle_id = -1;
  std::optional<int> customer_id;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ConstraintKind kind) const;
  std::string summary() const;
};

// Checks a solution against every routing constraint. Throws StructureError if
// the solution names a customer or vehicle the instance does not contain.
ValidationReport validate_solution(const Instance& inst, const Solution& sol);

}  // namespace dvrp
