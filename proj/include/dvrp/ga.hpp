#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dvrp/core.hpp"

namespace dvrp {

struct GaConfig {
  int population = 50;
  double vehicle_weight = 100.0;
  double mutation_prob = 0.10;
  int stall_generations = 50;
  int max_generations = 5000;
  std::uint64_t seed = 0;
};

// Penalties that keep chromosomes comparable when they do not fit the fleet.
inline constexpr double kExcessRoutePenalty = 1e5;
inline constexpr double kUnplacedPenalty = 1e6;

// Where a route begins: at customer `at` (the depot when empty), available
// from `time`, with `capacity` left. vehicle >= 0 pins the route to a vehicle
// that is already on the road.
struct RouteStart {
  std::optional<std::size_t> at;
  double time = 0.0;
  double capacity = 0.0;
  int vehicle = -1;
};

struct GaRoute {
  int start = 0;
  std::vector<std::size_t> seq;  // customer indices

  friend bool operator==(const GaRoute&, const GaRoute&) = default;
};

struct Chromosome {
  std::vector<GaRoute> routes;
  std::vector<std::size_t> unplaced;
  double fitness = 0.0;

  std::size_t customer_count() const;
};

// Routing problem seen by the GA. starts[0] is an unused vehicle at the depot
// and may open up to fresh_limit routes; every other start opens at most one.
class GaProblem {
 public:
  GaProblem(const Instance& inst, std::vector<RouteStart> starts, int fresh_limit,
            std::vector<std::size_t> customers, double vehicle_weight);
  static GaProblem whole(const Instance& inst, double vehicle_weight = 100.0);

  const Instance& instance() const { return *inst_; }
  const std::vector<RouteStart>& starts() const { return starts_; }
  int fresh_limit() const { return fresh_limit_; }
  double vehicle_weight() const { return vehicle_weight_; }
  // Customers to route; those no start can serve alone are in unservable().
  const std::vector<std::size_t>& customers() const { return customers_; }
  const std::vector<std::size_t>& unservable() const { return unservable_; }

  bool route_feasible(const GaRoute& r) const;
  double route_distance(const GaRoute& r) const;
  double route_load(const GaRoute& r) const;
  // Throws ContractViolation unless every route is feasible and every
  // customer appears exactly once.
  double fitness(const Chromosome& c) const;
  bool valid(const Chromosome& c) const;

 private:
  const Instance* inst_;
  std::vector<RouteStart> starts_;
  int fresh_limit_;
  std::vector<std::size_t> customers_;
  std::vector<std::size_t> unservable_;
  double vehicle_weight_;
};

Chromosome nearest_neighbour_chromosome(const GaProblem& p, std::mt19937_64& rng);
std::vector<Chromosome> init_population(const GaProblem& p, const GaConfig& cfg,
                                        std::mt19937_64& rng);
Chromosome improve_by_insertion(const GaProblem& p, const Chromosome& c);
const Chromosome& tournament_select(const std::vector<Chromosome>& pop, std::mt19937_64& rng);

enum class CrossoverKind { CommonNodes, CommonArcs };
Chromosome crossover(const GaProblem& p, const Chromosome& a, const Chromosome& b,
                     CrossoverKind kind, std::mt19937_64& rng);
// Picks either operator with equal probability.
Chromosome crossover(const GaProblem& p, const Chromosome& a, const Chromosome& b,
                     std::mt19937_64& rng);
Chromosome mutate(const GaProblem& p, const Chromosome& c, double probability,
                  std::mt19937_64& rng);

struct GaRun {
  Chromosome best;
  int generations = 0;
  std::vector<double> best_history;
};

GaRun evolve(const GaProblem& p, const GaConfig& cfg);

// Vehicle routes for a static instance; routes beyond the fleet are dropped
// and their customers reported unserved.
Solution chromosome_to_solution(const GaProblem& p, const Chromosome& c);

Solution run_ga(const Instance& inst, const GaConfig& cfg);

struct DynamicGaResult {
  Solution solution;
  int replans = 0;  // plans made after t = 0
  double replan_time_sec = 0.0;
};

// Plans on the customers known at t = 0, then re-plans at every reveal with
// started legs frozen. Wall time sums all planning runs.
DynamicGaResult run_ga_dynamic(const Instance& inst, const GaConfig& cfg);

}  // namespace dvrp
