#include "dvrp/ga.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>

namespace dvrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double slack(double x) {
  return 1e-9 * std::max(1.0, std::abs(x));
}

// Schedule of one route used for O(1) insertion checks: departure after
// service at each position and the latest service start that keeps the rest
// of the route feasible.
struct RouteTimes {
  std::vector<double> dep;
  std::vector<double> latest;
  double load = 0.0;
};

class Evaluator {
 public:
  explicit Evaluator(const GaProblem& p)
      : p_(p), in_(p.instance()), due_(in_.depot_due() ? *in_.depot_due() : kInf) {}

  double from_start(const RouteStart& s, std::size_t u) const {
    return s.at ? in_.dist(*s.at, u) : in_.depot_dist(u);
  }
  double start_to_depot(const RouteStart& s) const {
    return s.at ? in_.depot_dist(*s.at) : 0.0;
  }
  double speed() const { return in_.fleet().speed; }

  RouteTimes times(const GaRoute& r) const {
    const auto& s = p_.starts()[static_cast<std::size_t>(r.start)];
    const std::size_t m = r.seq.size();
    RouteTimes t;
    t.dep.resize(m);
    t.latest.resize(m);
    double prev_dep = s.time;
    for (std::size_t q = 0; q < m; ++q) {
      const auto u = r.seq[q];
      const auto& c = in_.customer(u);
      const double leg = q == 0 ? from_start(s, u) : in_.dist(r.seq[q - 1], u);
      const double start = std::max(prev_dep + leg / speed(), c.tw_min);
      t.dep[q] = start + c.service_duration;
      prev_dep = t.dep[q];
      t.load += c.demand;
    }
    for (std::size_t q = m; q-- > 0;) {
      const auto u = r.seq[q];
      const auto& c = in_.customer(u);
      const double onward = q + 1 == m ? due_ - in_.depot_travel(u)
                                       : t.latest[q + 1] - in_.travel(u, r.seq[q + 1]);
      t.latest[q] = std::min(c.tw_max, onward - c.service_duration);
    }
    return t;
  }

  // Extra distance from inserting u before position q, or nullopt.
  std::optional<double> insertion(const GaRoute& r, const RouteTimes& t, std::size_t u,
                                  std::size_t q) const {
    const auto& s = p_.starts()[static_cast<std::size_t>(r.start)];
    const auto& c = in_.customer(u);
    if (t.load + c.demand > s.capacity + slack(in_.fleet().capacity)) {
      return std::nullopt;
    }
    const std::size_t m = r.seq.size();
    const double prev_dep = q == 0 ? s.time : t.dep[q - 1];
    const double d_in = q == 0 ? from_start(s, u) : in_.dist(r.seq[q - 1], u);
    const double start = std::max(prev_dep + d_in / speed(), c.tw_min);
    if (start > c.tw_max + slack(c.tw_max)) {
      return std::nullopt;
    }
    const double dep = start + c.service_duration;
    double d_out = 0.0;
    double d_old = 0.0;
    if (q < m) {
      const auto next = r.seq[q];
      d_out = in_.dist(u, next);
      const double next_start = std::max(dep + d_out / speed(), in_.customer(next).tw_min);
      if (next_start > t.latest[q] + slack(t.latest[q])) {
        return std::nullopt;
      }
      d_old = q == 0 ? from_start(s, next) : in_.dist(r.seq[q - 1], next);
    } else {
      d_out = in_.depot_dist(u);
      if (dep + d_out / speed() > due_ + slack(due_)) {
        return std::nullopt;
      }
      d_old = m == 0 ? start_to_depot(s) : in_.depot_dist(r.seq[m - 1]);
    }
    return d_in + d_out - d_old;
  }

 private:
  const GaProblem& p_;
  const Instance& in_;
  double due_;
};

// Working set of routes with cached schedules, used by every operator that
// re-inserts customers.
class Builder {
 public:
  Builder(const GaProblem& p, std::vector<GaRoute> routes)
      : p_(p), ev_(p), routes_(std::move(routes)) {
    for (const auto& r : routes_) {
      times_.push_back(ev_.times(r));
    }
  }

  std::vector<GaRoute>& routes() { return routes_; }

  bool start_in_use(int s) const {
    return std::any_of(routes_.begin(), routes_.end(), [s](const GaRoute& r) { return r.start == s; });
  }

  int fresh_routes() const {
    return static_cast<int>(std::count_if(routes_.begin(), routes_.end(),
                                          [](const GaRoute& r) { return r.start == 0; }));
  }

  // Cheapest feasible insertion into an existing route or a pinned vehicle
  // that has no extension yet. excluded_start is never used.
  bool insert_cheapest(std::size_t u, int excluded_start = -1) {
    double best = kInf;
    std::size_t best_r = 0;
    std::size_t best_q = 0;
    int best_new_start = -1;
    for (std::size_t r = 0; r < routes_.size(); ++r) {
      for (std::size_t q = 0; q <= routes_[r].seq.size(); ++q) {
        const auto d = ev_.insertion(routes_[r], times_[r], u, q);
        if (d && *d < best) {
          best = *d;
          best_r = r;
          best_q = q;
          best_new_start = -1;
        }
      }
    }
    const auto& starts = p_.starts();
    for (std::size_t s = 1; s < starts.size(); ++s) {
      const int si = static_cast<int>(s);
      if (si == excluded_start || start_in_use(si)) {
        continue;
      }
      GaRoute empty{si, {}};
      const auto d = ev_.insertion(empty, ev_.times(empty), u, 0);
      if (d && *d < best) {
        best = *d;
        best_new_start = si;
      }
    }
    if (!std::isfinite(best)) {
      return false;
    }
    if (best_new_start >= 0) {
      add_route({best_new_start, {u}});
    } else {
      auto& seq = routes_[best_r].seq;
      seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(best_q), u);
      times_[best_r] = ev_.times(routes_[best_r]);
    }
    return true;
  }

  bool alone_feasible(int s, std::size_t u) const {
    GaRoute r{s, {u}};
    return p_.route_feasible(r);
  }

  // Opens a new route for u, preferring an unused vehicle within the fleet.
  bool open_route(std::size_t u, int excluded_start = -1) {
    if (fresh_routes() < p_.fresh_limit() && alone_feasible(0, u)) {
      add_route({0, {u}});
      return true;
    }
    for (std::size_t s = 1; s < p_.starts().size(); ++s) {
      const int si = static_cast<int>(s);
      if (si != excluded_start && !start_in_use(si) && alone_feasible(si, u)) {
        add_route({si, {u}});
        return true;
      }
    }
    if (alone_feasible(0, u)) {
      add_route({0, {u}});
      return true;
    }
    return false;
  }

  // Appends the nearest customer that still fits at the end of route r.
  void extend_greedily(std::size_t r, std::vector<std::size_t>& pool) {
    const auto& in = p_.instance();
    for (;;) {
      const auto& route = routes_[r];
      const auto& s = p_.starts()[static_cast<std::size_t>(route.start)];
      std::size_t best_k = pool.size();
      double best_d = kInf;
      for (std::size_t k = 0; k < pool.size(); ++k) {
        const auto u = pool[k];
        if (!ev_.insertion(route, times_[r], u, route.seq.size())) {
          continue;
        }
        const double d = route.seq.empty() ? ev_.from_start(s, u) : in.dist(route.seq.back(), u);
        if (d < best_d) {
          best_d = d;
          best_k = k;
        }
      }
      if (best_k == pool.size()) {
        return;
      }
      routes_[r].seq.push_back(pool[best_k]);
      times_[r] = ev_.times(routes_[r]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_k));
    }
  }

  void add_route(GaRoute r) {
    times_.push_back(ev_.times(r));
    routes_.push_back(std::move(r));
  }

  void place_all(const std::vector<std::size_t>& order, std::vector<std::size_t>& unplaced) {
    for (auto u : order) {
      if (!insert_cheapest(u) && !open_route(u)) {
        unplaced.push_back(u);
      }
    }
  }

 private:
  const GaProblem& p_;
  Evaluator ev_;
  std::vector<GaRoute> routes_;
  std::vector<RouteTimes> times_;
};

Chromosome finish(const GaProblem& p, std::vector<GaRoute> routes, std::vector<std::size_t> unplaced) {
  Chromosome c;
  for (auto& r : routes) {
    if (!r.seq.empty()) {
      c.routes.push_back(std::move(r));
    }
  }
  std::sort(unplaced.begin(), unplaced.end());
  c.unplaced = std::move(unplaced);
  c.fitness = p.fitness(c);
  return c;
}

// Visits for seq driven from a vehicle available at `from` at time `ready`.
std::vector<Visit> timed_visits(const Instance& in, std::optional<std::size_t> from, double ready,
                                const std::vector<std::size_t>& seq) {
  std::vector<Visit> out;
  double t = ready;
  for (auto u : seq) {
    const auto& c = in.customer(u);
    const double leg = from ? in.dist(*from, u) : in.depot_dist(u);
    const double arrival = t + leg / in.fleet().speed;
    const double start = std::max(arrival, c.tw_min);
    out.push_back({c.id, arrival, start, start + c.service_duration});
    t = start + c.service_duration;
    from = u;
  }
  return out;
}

}  // namespace

std::size_t Chromosome::customer_count() const {
  std::size_t n = unplaced.size();
  for (const auto& r : routes) {
    n += r.seq.size();
  }
  return n;
}

GaProblem::GaProblem(const Instance& inst, std::vector<RouteStart> starts, int fresh_limit,
                     std::vector<std::size_t> customers, double vehicle_weight)
    : inst_(&inst),
      starts_(std::move(starts)),
      fresh_limit_(fresh_limit),
      vehicle_weight_(vehicle_weight) {
  if (starts_.empty() || starts_.front().vehicle >= 0 || starts_.front().at) {
    throw ContractViolation("the first route start must be an unused vehicle at the depot");
  }
  for (auto u : customers) {
    bool ok = false;
    for (std::size_t s = 0; s < starts_.size() && !ok; ++s) {
      if (s == 0 && fresh_limit_ <= 0) {
        continue;
      }
      ok = route_feasible({static_cast<int>(s), {u}});
    }
    (ok ? customers_ : unservable_).push_back(u);
  }
}

GaProblem GaProblem::whole(const Instance& inst, double vehicle_weight) {
  std::vector<std::size_t> all(inst.size());
  std::iota(all.begin(), all.end(), 0);
  return GaProblem(inst, {RouteStart{std::nullopt, 0.0, inst.fleet().capacity, -1}},
                   inst.fleet().count, std::move(all), vehicle_weight);
}

bool GaProblem::route_feasible(const GaRoute& r) const {
  if (r.start < 0 || static_cast<std::size_t>(r.start) >= starts_.size()) {
    return false;
  }
  const auto& in = *inst_;
  const auto& s = starts_[static_cast<std::size_t>(r.start)];
  double t = s.time;
  double load = 0.0;
  std::optional<std::size_t> at = s.at;
  for (auto u : r.seq) {
    if (u >= in.size()) {
      return false;
    }
    const auto& c = in.customer(u);
    const double leg = at ? in.dist(*at, u) : in.depot_dist(u);
    const double start = std::max(t + leg / in.fleet().speed, c.tw_min);
    if (start > c.tw_max + slack(c.tw_max)) {
      return false;
    }
    t = start + c.service_duration;
    load += c.demand;
    at = u;
  }
  if (load > s.capacity + slack(in.fleet().capacity)) {
    return false;
  }
  if (in.depot_due() && at) {
    if (t + in.depot_travel(*at) > *in.depot_due() + slack(*in.depot_due())) {
      return false;
    }
  }
  return true;
}

double GaProblem::route_distance(const GaRoute& r) const {
  const auto& in = *inst_;
  const auto& s = starts_[static_cast<std::size_t>(r.start)];
  if (r.seq.empty()) {
    return s.at ? in.depot_dist(*s.at) : 0.0;
  }
  double d = s.at ? in.dist(*s.at, r.seq.front()) : in.depot_dist(r.seq.front());
  for (std::size_t q = 1; q < r.seq.size(); ++q) {
    d += in.dist(r.seq[q - 1], r.seq[q]);
  }
  return d + in.depot_dist(r.seq.back());
}

double GaProblem::route_load(const GaRoute& r) const {
  double load = 0.0;
  for (auto u : r.seq) {
    load += inst_->customer(u).demand;
  }
  return load;
}

bool GaProblem::valid(const Chromosome& c) const {
  std::vector<int> seen(inst_->size(), 0);
  std::vector<int> start_use(starts_.size(), 0);
  for (const auto& r : c.routes) {
    if (r.seq.empty() || !route_feasible(r)) {
      return false;
    }
    if (r.start > 0 && ++start_use[static_cast<std::size_t>(r.start)] > 1) {
      return false;
    }
    for (auto u : r.seq) {
      ++seen[u];
    }
  }
  for (auto u : c.unplaced) {
    if (u >= seen.size()) {
      return false;
    }
    ++seen[u];
  }
  std::vector<int> want(inst_->size(), 0);
  for (auto u : customers_) {
    want[u] = 1;
  }
  return seen == want;
}

double GaProblem::fitness(const Chromosome& c) const {
  if (!valid(c)) {
    throw ContractViolation("fitness of an infeasible or incomplete chromosome");
  }
  double total = 0.0;
  int fresh = 0;
  std::vector<bool> used(starts_.size(), false);
  for (const auto& r : c.routes) {
    total += route_distance(r);
    used[static_cast<std::size_t>(r.start)] = true;
    if (r.start == 0) {
      ++fresh;
    }
  }
  // Vehicles already on the road still have to drive home.
  for (std::size_t s = 1; s < starts_.size(); ++s) {
    if (!used[s]) {
      total += route_distance({static_cast<int>(s), {}});
    }
  }
  total += vehicle_weight_ * fresh;
  total += kExcessRoutePenalty * std::max(0, fresh - fresh_limit_);
  total += kUnplacedPenalty * static_cast<double>(c.unplaced.size());
  return total;
}

Chromosome nearest_neighbour_chromosome(const GaProblem& p, std::mt19937_64& rng) {
  std::vector<std::size_t> pool = p.customers();
  std::vector<std::size_t> unplaced;
  Builder b(p, {});

  std::vector<int> pinned;
  for (std::size_t s = 1; s < p.starts().size(); ++s) {
    pinned.push_back(static_cast<int>(s));
  }
  std::shuffle(pinned.begin(), pinned.end(), rng);
  for (int s : pinned) {
    b.add_route({s, {}});
    b.extend_greedily(b.routes().size() - 1, pool);
  }

  while (!pool.empty()) {
    const auto k = std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
    const auto seed = pool[k];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    if (!b.open_route(seed)) {
      unplaced.push_back(seed);
      continue;
    }
    b.extend_greedily(b.routes().size() - 1, pool);
  }
  return finish(p, std::move(b.routes()), std::move(unplaced));
}

Chromosome improve_by_insertion(const GaProblem& p, const Chromosome& c) {
  if (c.routes.size() <= 1) {
    return c;
  }
  std::size_t victim = 0;
  for (std::size_t r = 1; r < c.routes.size(); ++r) {
    if (p.route_load(c.routes[r]) < p.route_load(c.routes[victim])) {
      victim = r;
    }
  }
  auto routes = c.routes;
  const GaRoute removed = routes[victim];
  routes.erase(routes.begin() + static_cast<std::ptrdiff_t>(victim));
  Builder b(p, std::move(routes));
  std::vector<std::size_t> leftover;
  for (auto u : removed.seq) {
    if (!b.insert_cheapest(u, removed.start)) {
      leftover.push_back(u);
    }
  }
  if (!leftover.empty()) {
    // A subsequence of a feasible route is still feasible.
    b.add_route({removed.start, leftover});
  }
  auto candidate = finish(p, std::move(b.routes()), c.unplaced);
  return candidate.fitness <= c.fitness ? candidate : c;
}

std::vector<Chromosome> init_population(const GaProblem& p, const GaConfig& cfg,
                                        std::mt19937_64& rng) {
  std::vector<Chromosome> pop;
  pop.reserve(static_cast<std::size_t>(std::max(cfg.population, 1)));
  for (int i = 0; i < std::max(cfg.population, 1); ++i) {
    auto c = nearest_neighbour_chromosome(p, rng);
    for (int pass = 0; pass < 64; ++pass) {
      auto better = improve_by_insertion(p, c);
      if (better.routes.size() == c.routes.size() && better.fitness >= c.fitness) {
        break;
      }
      c = std::move(better);
    }
    pop.push_back(std::move(c));
  }
  return pop;
}

const Chromosome& tournament_select(const std::vector<Chromosome>& pop, std::mt19937_64& rng) {
  if (pop.empty()) {
    throw ContractViolation("tournament over an empty population");
  }
  if (pop.size() == 1) {
    return pop.front();
  }
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  const auto i = pick(rng);
  const auto j = pick(rng);
  return pop[j].fitness < pop[i].fitness ? pop[j] : pop[i];
}

Chromosome crossover(const GaProblem& p, const Chromosome& a, const Chromosome& b,
                     CrossoverKind kind, std::mt19937_64& rng) {
  const std::size_t n = p.instance().size();
  std::vector<GaRoute> kept;
  std::vector<bool> placed(n, false);

  if (kind == CrossoverKind::CommonNodes) {
    std::vector<int> route_of(n, -1);
    for (std::size_t r = 0; r < b.routes.size(); ++r) {
      for (auto u : b.routes[r].seq) {
        route_of[u] = static_cast<int>(r);
      }
    }
    for (const auto& A : a.routes) {
      std::vector<int> overlap(b.routes.size(), 0);
      for (auto u : A.seq) {
        if (route_of[u] >= 0) {
          ++overlap[static_cast<std::size_t>(route_of[u])];
        }
      }
      if (overlap.empty()) {
        continue;
      }
      const int best = static_cast<int>(std::max_element(overlap.begin(), overlap.end()) - overlap.begin());
      GaRoute r{A.start, {}};
      for (auto u : A.seq) {
        if (route_of[u] == best) {
          r.seq.push_back(u);
        }
      }
      kept.push_back(std::move(r));
    }
  } else {
    // Node codes: customers 0..n-1, route starts n+s, the closing depot n+|starts|.
    const std::size_t depot_code = n + p.starts().size();
    std::set<std::pair<std::size_t, std::size_t>> arcs;
    for (const auto& B : b.routes) {
      std::size_t prev = n + static_cast<std::size_t>(B.start);
      for (auto u : B.seq) {
        arcs.insert({prev, u});
        prev = u;
      }
      arcs.insert({prev, depot_code});
    }
    for (const auto& A : a.routes) {
      GaRoute r{A.start, {}};
      for (std::size_t q = 0; q < A.seq.size(); ++q) {
        const std::size_t pred = q == 0 ? n + static_cast<std::size_t>(A.start) : A.seq[q - 1];
        const std::size_t succ = q + 1 == A.seq.size() ? depot_code : A.seq[q + 1];
        if (arcs.count({pred, A.seq[q]}) || arcs.count({A.seq[q], succ})) {
          r.seq.push_back(A.seq[q]);
        }
      }
      kept.push_back(std::move(r));
    }
  }

  std::vector<GaRoute> routes;
  for (auto& r : kept) {
    if (r.seq.empty() || !p.route_feasible(r)) {
      continue;
    }
    for (auto u : r.seq) {
      placed[u] = true;
    }
    routes.push_back(std::move(r));
  }
  std::vector<std::size_t> leftovers;
  for (auto u : p.customers()) {
    if (!placed[u]) {
      leftovers.push_back(u);
    }
  }
  std::shuffle(leftovers.begin(), leftovers.end(), rng);
  Builder builder(p, std::move(routes));
  std::vector<std::size_t> unplaced;
  builder.place_all(leftovers, unplaced);
  return finish(p, std::move(builder.routes()), std::move(unplaced));
}

Chromosome crossover(const GaProblem& p, const Chromosome& a, const Chromosome& b,
                     std::mt19937_64& rng) {
  const bool arcs = std::bernoulli_distribution(0.5)(rng);
  return crossover(p, a, b, arcs ? CrossoverKind::CommonArcs : CrossoverKind::CommonNodes, rng);
}

Chromosome mutate(const GaProblem& p, const Chromosome& c, double probability,
                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) >= probability) {
    return c;
  }
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t r = 0; r < c.routes.size(); ++r) {
    for (std::size_t q = 0; q < c.routes[r].seq.size(); ++q) {
      slots.push_back({r, q});
    }
  }
  if (slots.size() < 2) {
    return c;
  }
  std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
  for (int attempt = 0; attempt < 20; ++attempt) {
    auto routes = c.routes;
    const auto [r1, q1] = slots[pick(rng)];
    const auto [r2, q2] = slots[pick(rng)];
    if (r1 == r2 && q1 == q2) {
      continue;
    }
    if (std::bernoulli_distribution(0.5)(rng)) {
      std::swap(routes[r1].seq[q1], routes[r2].seq[q2]);
      if (!p.route_feasible(routes[r1]) || !p.route_feasible(routes[r2])) {
        continue;
      }
    } else {
      const auto u = routes[r1].seq[q1];
      routes[r1].seq.erase(routes[r1].seq.begin() + static_cast<std::ptrdiff_t>(q1));
      auto& target = routes[r2].seq;
      const std::size_t pos = std::min(q2, target.size());
      target.insert(target.begin() + static_cast<std::ptrdiff_t>(pos), u);
      if (!p.route_feasible(routes[r1]) || !p.route_feasible(routes[r2])) {
        continue;
      }
    }
    return finish(p, std::move(routes), c.unplaced);
  }
  return c;
}

GaRun evolve(const GaProblem& p, const GaConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  GaRun run;
  if (p.customers().empty()) {
    run.best = finish(p, {}, {});
    run.best_history.push_back(run.best.fitness);
    return run;
  }
  auto pop = init_population(p, cfg, rng);
  auto best_of = [](const std::vector<Chromosome>& v) {
    return std::min_element(v.begin(), v.end(), [](const Chromosome& x, const Chromosome& y) {
      return x.fitness < y.fitness;
    });
  };
  run.best = *best_of(pop);
  run.best_history.push_back(run.best.fitness);

  int stall = 0;
  const std::size_t size = pop.size();
  while (stall < cfg.stall_generations && run.generations < cfg.max_generations) {
    std::vector<Chromosome> next;
    next.reserve(size);
    next.push_back(run.best);
    while (next.size() < size) {
      const auto& a = tournament_select(pop, rng);
      const auto& b = tournament_select(pop, rng);
      auto child = crossover(p, a, b, rng);
      child = mutate(p, child, cfg.mutation_prob, rng);
      child = improve_by_insertion(p, child);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    ++run.generations;
    const auto& gen_best = *best_of(pop);
    if (gen_best.fitness < run.best.fitness - 1e-9) {
      run.best = gen_best;
      stall = 0;
    } else {
      ++stall;
    }
    run.best_history.push_back(run.best.fitness);
  }
  return run;
}

Solution chromosome_to_solution(const GaProblem& p, const Chromosome& c) {
  const auto& in = p.instance();
  std::vector<GaRoute> fresh;
  for (const auto& r : c.routes) {
    if (r.start != 0) {
      throw ContractViolation("chromosome_to_solution handles whole-instance problems only");
    }
    fresh.push_back(r);
  }
  // Keep the heaviest routes when the plan needs more vehicles than exist.
  std::stable_sort(fresh.begin(), fresh.end(), [&](const GaRoute& x, const GaRoute& y) {
    return p.route_load(x) > p.route_load(y);
  });
  if (fresh.size() > static_cast<std::size_t>(in.fleet().count)) {
    fresh.resize(static_cast<std::size_t>(in.fleet().count));
  }
  std::sort(fresh.begin(), fresh.end(), [&](const GaRoute& x, const GaRoute& y) {
    return in.customer(x.seq.front()).id < in.customer(y.seq.front()).id;
  });
  std::vector<Route> routes;
  for (std::size_t r = 0; r < fresh.size(); ++r) {
    routes.push_back(schedule_route(in, static_cast<int>(r), fresh[r].seq));
  }
  return assemble_solution(in, std::move(routes));
}

Solution run_ga(const Instance& inst, const GaConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = GaProblem::whole(inst, cfg.vehicle_weight);
  const auto run = evolve(p, cfg);
  auto sol = chromosome_to_solution(p, run.best);
  sol.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

DynamicGaResult run_ga_dynamic(const Instance& inst, const GaConfig& cfg) {
  DynamicGaResult result;
  if (!inst.has_dynamic_customers()) {
    result.solution = run_ga(inst, cfg);
    return result;
  }
  using Clock = std::chrono::steady_clock;
  const auto& in = inst;
  const double M = in.fleet().capacity;

  struct Plan {
    std::vector<std::size_t> seq;
    std::vector<Visit> visits;
    double depot_departure = 0.0;
  };
  std::vector<Plan> plans(static_cast<std::size_t>(in.fleet().count));

  std::vector<double> times{0.0};
  for (const auto& c : in.customers()) {
    if (c.reveal_time > 0.0) {
      times.push_back(c.reveal_time);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  double total = 0.0;
  for (std::size_t step = 0; step < times.size(); ++step) {
    const double r = times[step];
    const auto t0 = Clock::now();

    std::vector<RouteStart> starts{RouteStart{std::nullopt, r, M, -1}};
    std::vector<bool> committed(in.size(), false);
    int used = 0;
    for (std::size_t v = 0; v < plans.size(); ++v) {
      auto& pl = plans[v];
      if (pl.visits.empty()) {
        continue;
      }
      // A stop is frozen once the leg towards it has started.
      std::size_t keep = 0;
      while (keep < pl.visits.size() &&
             (keep == 0 ? pl.depot_departure : pl.visits[keep - 1].departure) <= r) {
        ++keep;
      }
      const bool all_started = keep == pl.visits.size();
      pl.seq.resize(keep);
      pl.visits.resize(keep);
      if (keep == 0) {
        continue;
      }
      ++used;
      for (auto u : pl.seq) {
        committed[u] = true;
      }
      const double free_at = pl.visits.back().departure;
      if (all_started && free_at <= r) {
        continue;  // already heading home
      }
      double load = 0.0;
      for (auto u : pl.seq) {
        load += in.customer(u).demand;
      }
      starts.push_back(RouteStart{pl.seq.back(), free_at, M - load, static_cast<int>(v)});
    }

    std::vector<std::size_t> pool;
    for (std::size_t u = 0; u < in.size(); ++u) {
      if (!committed[u] && in.customer(u).reveal_time <= r) {
        pool.push_back(u);
      }
    }
    const int fresh_limit = in.fleet().count - used;
    GaProblem problem(in, starts, fresh_limit, pool, cfg.vehicle_weight);
    GaConfig step_cfg = cfg;
    step_cfg.seed = cfg.seed + step;
    const auto run = evolve(problem, step_cfg);

    std::vector<GaRoute> fresh;
    for (const auto& route : run.best.routes) {
      if (route.start == 0) {
        fresh.push_back(route);
        continue;
      }
      const auto& s = starts[static_cast<std::size_t>(route.start)];
      auto& pl = plans[static_cast<std::size_t>(s.vehicle)];
      const auto extra = timed_visits(in, s.at, s.time, route.seq);
      pl.seq.insert(pl.seq.end(), route.seq.begin(), route.seq.end());
      pl.visits.insert(pl.visits.end(), extra.begin(), extra.end());
    }
    std::stable_sort(fresh.begin(), fresh.end(), [&](const GaRoute& x, const GaRoute& y) {
      return problem.route_load(x) > problem.route_load(y);
    });
    if (fresh.size() > static_cast<std::size_t>(std::max(fresh_limit, 0))) {
      fresh.resize(static_cast<std::size_t>(std::max(fresh_limit, 0)));
    }
    std::sort(fresh.begin(), fresh.end(), [&](const GaRoute& x, const GaRoute& y) {
      return in.customer(x.seq.front()).id < in.customer(y.seq.front()).id;
    });
    std::size_t next_vehicle = 0;
    for (const auto& route : fresh) {
      while (!plans[next_vehicle].visits.empty()) {
        ++next_vehicle;
      }
      auto& pl = plans[next_vehicle];
      const auto first = route.seq.front();
      const double leave = std::max(r, in.customer(first).tw_min - in.depot_travel(first));
      pl.seq = route.seq;
      pl.depot_departure = leave;
      pl.visits = timed_visits(in, std::nullopt, leave, route.seq);
    }

    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    total += elapsed;
    if (step > 0) {
      ++result.replans;
      result.replan_time_sec += elapsed;
    }
  }

  std::vector<Route> routes;
  for (std::size_t v = 0; v < plans.size(); ++v) {
    const auto& pl = plans[v];
    if (pl.visits.empty()) {
      continue;
    }
    Route route;
    route.vehicle_id = static_cast<int>(v);
    route.visits = pl.visits;
    route.depot_departure = pl.depot_departure;
    route.depot_return = pl.visits.back().departure + in.depot_travel(pl.seq.back());
    double d = in.depot_dist(pl.seq.front());
    for (std::size_t q = 0; q < pl.seq.size(); ++q) {
      route.load += in.customer(pl.seq[q]).demand;
      if (q > 0) {
        d += in.dist(pl.seq[q - 1], pl.seq[q]);
      }
    }
    route.distance = d + in.depot_dist(pl.seq.back());
    routes.push_back(std::move(route));
  }
  result.solution = assemble_solution(in, std::move(routes), total);
  return result;
}

}  // namespace dvrp
