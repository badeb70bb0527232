#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "dvrp/core.hpp"

namespace dvrp {

enum class VehicleStatus { AtDepot, EnRoute, Serving, IdleAtCustomer, Retired };

const char* to_string(VehicleStatus status);

enum class CustomerStatus { Pending, Active, Assigned, Served, Dropped };

// One committed stop on a vehicle's trip. `ready` is when the vehicle was
// available at its previous stop, `depart` when it actually leaves (later than
// `ready` if it waits for the window to open).
struct PlannedVisit {
  std::size_t customer = 0;
  double ready = 0.0;
  double depart = 0.0;
  double arrival = 0.0;
  double service_start = 0.0;
  double departure = 0.0;
};

struct VehicleState {
  int id = 0;
  VehicleStatus status = VehicleStatus::AtDepot;
  // Where the vehicle will be once its current commitment completes.
  Location location_now;
  double free_at = 0.0;
  double remaining_capacity = 0.0;
  std::optional<std::size_t> last_customer;
  int visits_so_far = 0;
  std::optional<std::size_t> committed_customer;

  std::vector<PlannedVisit> trip;
  std::size_t completed = 0;
  std::optional<double> depot_return;

  bool retired() const { return status == VehicleStatus::Retired; }
  bool has_commitment() const { return completed < trip.size(); }
};

// Start conditions a vehicle would have for its next assignment.
struct VehicleBase {
  Location loc;
  std::optional<std::size_t> at;  // customer index, nullopt when at the depot
  double time = 0.0;
  double capacity = 0.0;
};

// Timings a vehicle would get if assigned customer i right now.
struct Projection {
  double depart = 0.0;
  double arrival = 0.0;
  double service_start = 0.0;
  double departure = 0.0;
  double leg = 0.0;
};

struct Pair {
  int vehicle = 0;
  std::size_t customer = 0;

  friend bool operator==(const Pair&, const Pair&) = default;
};

// Why a decision epoch starts: the vehicles to decide for, plus any waiting
// vehicles whose deferred commitment was released by a reveal.
struct Epoch {
  double time = 0.0;
  std::vector<int> vehicles;
  std::vector<int> released;
  bool revealed = false;
};

class SimState {
 public:
  // All customers with reveal_time 0 start active; the rest are pending. With
  // honor_reveals = false every customer is active at time zero.
  static SimState reset(std::shared_ptr<const Instance> inst, bool honor_reveals = true);
  static SimState reset(const Instance& inst, bool honor_reveals = true);

  const Instance& instance() const { return *inst_; }
  std::shared_ptr<const Instance> instance_ptr() const { return inst_; }
  double clock() const { return clock_; }

  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  const VehicleState& vehicle(int k) const { return vehicles_.at(static_cast<std::size_t>(k)); }
  const std::set<std::size_t>& active() const { return active_; }
  CustomerStatus status(std::size_t i) const { return status_[i]; }
  std::size_t count(CustomerStatus s) const;

  bool is_free(int k) const;
  // Committed but still parked at its current location (reroutable).
  bool is_waiting(int k) const;
  // Never dispatched and not retired.
  bool is_unused(int k) const;
  std::vector<int> free_vehicles() const;

  VehicleBase base(int k) const;
  Projection project(int k, std::size_t i) const;
  bool can_serve(int k, std::size_t i) const;
  std::vector<Pair> feasible_pairs() const;
  std::size_t pending_count() const { return pending_.size() - pending_pos_; }
  std::optional<double> next_reveal() const;

  // Commits customer i to vehicle k. Busy vehicles chain the stop after their
  // current commitment. Throws ContractViolation (state unchanged) if infeasible.
  void apply_assignment(int k, std::size_t i);
  // Sends k back to the depot; it is retired and takes no further work.
  void send_to_depot(int k);
  // Undoes the deferred commitment of a waiting vehicle.
  void release_waiting(int k);

  // Jumps to the next event. Returns nullopt when the episode is over.
  std::optional<Epoch> advance();
  bool is_terminal() const;
  // Returns every vehicle to the depot and assembles the Solution.
  Solution finalize();

  SimState clone_for_soft() const;

  void set_trace(std::ostream* out) { trace_ = out; }

 private:
  SimState() = default;

  void drop_unservable();
  bool optimistic_can_serve(const VehicleState& v, std::size_t i) const;
  void refresh_status(VehicleState& v) const;
  void log(const char* kind, int vehicle, std::optional<std::size_t> customer) const;

  std::shared_ptr<const Instance> inst_;
  double clock_ = 0.0;
  std::vector<VehicleState> vehicles_;
  std::vector<CustomerStatus> status_;
  std::set<std::size_t> active_;
  std::vector<std::size_t> pending_;  // sorted by (reveal_time, id)
  std::size_t pending_pos_ = 0;
  std::ostream* trace_ = nullptr;
};

}  // namespace dvrp
