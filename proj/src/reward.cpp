#include "dvrp/reward.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace dvrp {

namespace {

double direction_bonus(const SimState& s, double target_to_depot, double current_to_depot) {
  const double tau = norm_time(s.instance());
  if (s.clock() <= tau / 2.0) {
    return target_to_depot > current_to_depot ? 1.0 : 0.0;
  }
  return target_to_depot < current_to_depot ? 1.0 : 0.0;
}

}  // namespace

double step_reward(const StepContext& c, const RewardWeights& w) {
  const auto& a = w.a;
  return -a[0] * c.leg_distance - a[1] * c.window_slack - a[2] * c.wait_time -
         a[3] * c.delta_vs_closest - a[4] * c.next_cost + a[5] * c.direction_bonus +
         a[6] * c.sole_server;
}

StepContext build_step_context(const FeatureContext& fc, int k, std::size_t j) {
  const auto& s = fc.state();
  if (j >= s.instance().size() || !s.can_serve(k, j)) {
    throw ContractViolation(fmt::format("step context for infeasible pair ({}, {})", k, j));
  }
  const auto& in = s.instance();
  const auto& c = in.customer(j);
  const auto& v = s.vehicle(k);
  const double D = norm_dist(in);
  const double tau = norm_time(in);
  const double speed = in.fleet().speed;
  const auto p = s.project(k, j);
  const double unwaited = std::max(v.free_at, s.clock()) + p.leg / speed;

  StepContext ctx;
  ctx.leg_distance = p.leg / D;
  ctx.window_slack = (c.tw_max - p.arrival) / tau;
  ctx.wait_time = std::max(c.tw_min - unwaited, 0.0) / tau;
  ctx.delta_vs_closest = std::max(0.0, p.leg - fc.nearest_vehicle_distance(j)) / D;

  if (auto next = next_reachable_customer(s, j, k)) {
    const auto& cn = in.customer(*next);
    const double travel = in.dist(j, *next) / speed;
    const double wait = std::max(cn.tw_min - (p.departure + travel), 0.0);
    ctx.next_cost = (travel + wait) / tau;
  } else {
    ctx.next_cost = 1.0;
  }

  ctx.direction_bonus =
      direction_bonus(s, in.depot_dist(j), distance(v.location_now, in.depot()));
  ctx.sole_server = fc.sole_server(k, j) ? 1.0 : 0.0;
  return ctx;
}

StepContext build_step_context(const SimState& s, int k, std::size_t j) {
  return build_step_context(FeatureContext(s), k, j);
}

StepContext build_depot_context(const SimState& s, int k) {
  const auto& in = s.instance();
  const double back = distance(s.vehicle(k).location_now, in.depot());
  StepContext ctx;
  ctx.leg_distance = back / norm_dist(in);
  ctx.direction_bonus = direction_bonus(s, 0.0, back);
  return ctx;
}

double total_reward(double step, double fulfilment, int n_total, int n, double gamma) {
  if (n < 1 || n > n_total) {
    throw ContractViolation(fmt::format("stage {} outside 1..{}", n, n_total));
  }
  return step + std::pow(gamma, n_total - n) * fulfilment;
}

}  // namespace dvrp
