#include <gtest/gtest.h>

#include <cmath>

#include "dvrp/env.hpp"
#include "dvrp/instance_io.hpp"
#include "dvrp/reward.hpp"
#include "helpers.hpp"

using namespace dvrp;
using dvrp::testing::make_instance;

TEST(StepReward, ZeroContext) { EXPECT_EQ(step_reward(StepContext{}), 0.0); }

TEST(StepReward, LegOnly) {
  StepContext c;
  c.leg_distance = 0.5;
  EXPECT_DOUBLE_EQ(step_reward(c), -0.1);
}

TEST(StepReward, BonusesOnly) {
  StepContext c;
  c.direction_bonus = 1;
  c.sole_server = 1;
  EXPECT_DOUBLE_EQ(step_reward(c), 0.35);
}

TEST(StepReward, LinearInEachTerm) {
  RewardWeights w;
  const double sign[] = {-1, -1, -1, -1, -1, 1, 1};
  StepContext base{0.3, 0.2, 0.1, 0.05, 0.4, 1, 0};
  for (int t = 0; t < 7; ++t) {
    auto hi = base;
    auto lo = base;
    double* fh = &hi.leg_distance + t;
    double* fl = &lo.leg_distance + t;
    *fh += 0.5;
    *fl -= 0.5;
    const double slope = (step_reward(hi, w) - step_reward(lo, w)) / 1.0;
    EXPECT_NEAR(slope, sign[t] * w.a[static_cast<std::size_t>(t)], 1e-12) << "term " << t;
  }
}

TEST(TotalReward, LastStageAddsFullBonus) { EXPECT_DOUBLE_EQ(total_reward(-0.3, 1.0, 4, 4, 0.9), 0.7); }

TEST(TotalReward, ZeroFulfilment) { EXPECT_DOUBLE_EQ(total_reward(-0.3, 0.0, 4, 1, 0.9), -0.3); }

TEST(TotalReward, TwoStagesBack) { EXPECT_NEAR(total_reward(0.0, 1.0, 5, 3, 0.9), 0.81, 1e-12); }

TEST(TotalReward, StageOutOfRange) {
  EXPECT_THROW(total_reward(0.0, 1.0, 3, 4, 0.9), ContractViolation);
  EXPECT_THROW(total_reward(0.0, 1.0, 3, 0, 0.9), ContractViolation);
}

TEST(TotalReward, BonusNonincreasingWithDistanceToEnd) {
  for (int n = 2; n <= 10; ++n) {
    EXPECT_LE(total_reward(0, 1, 10, n - 1, 0.9), total_reward(0, 1, 10, n, 0.9));
  }
}

TEST(StepContext, SingleVehicleHasNoDelta) {
  GeneratorConfig cfg;
  cfg.n_vehicles = 1;
  auto s = SimState::reset(generate_training_instance(cfg));
  for (const auto& p : s.feasible_pairs()) {
    EXPECT_EQ(build_step_context(s, p.vehicle, p.customer).delta_vs_closest, 0.0);
  }
}

TEST(StepContext, DirectionBonusStrictBoundary) {
  // The vehicle sits at customer 0, five units from the depot; customer 1 is
  // equally far and customer 2 farther out.
  auto inst = make_instance({{3, 4, 1, 0, 1000}, {4, 3, 1, 0, 1000}, {30, 40, 1, 0, 1000}}, 1, 100);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  ASSERT_TRUE(s.advance());
  EXPECT_EQ(build_step_context(s, 0, 1).direction_bonus, 0.0);
  EXPECT_EQ(build_step_context(s, 0, 2).direction_bonus, 1.0);
}

TEST(StepContext, AbsentNextCustomerUsesSentinel) {
  auto inst = make_instance({{3, 4, 1, 0, 100}}, 1, 100);
  auto s = SimState::reset(inst);
  auto c = build_step_context(s, 0, 0);
  EXPECT_EQ(c.next_cost, 1.0);
  EXPECT_EQ(c.sole_server, 1.0);
}

TEST(StepContext, HandComputedTerms) {
  // Depot (0,0), speed 1, two idle vehicles. Horizon 200, diagonal of the
  // box (0,0)-(30,40) is 50.
  auto inst = make_instance({{30, 40, 1, 80, 200}, {30, 0, 1, 0, 150}}, 2, 100);
  auto s = SimState::reset(inst);
  auto c = build_step_context(s, 1, 0);
  EXPECT_DOUBLE_EQ(c.leg_distance, 1.0);
  EXPECT_DOUBLE_EQ(c.window_slack, (200.0 - 80.0) / 200.0);
  EXPECT_DOUBLE_EQ(c.wait_time, 30.0 / 200.0);
  EXPECT_EQ(c.delta_vs_closest, 0.0);
  EXPECT_DOUBLE_EQ(c.next_cost, 40.0 / 200.0);
  EXPECT_EQ(c.direction_bonus, 1.0);
  EXPECT_EQ(c.sole_server, 0.0);
}

TEST(StepContext, DepotLegOnlyCarriesDistanceAndDirection) {
  auto inst = make_instance({{30, 40, 1, 0, 100}, {0, 10, 1, 0, 100}}, 1, 100);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  ASSERT_TRUE(s.advance());
  auto c = build_depot_context(s, 0);
  EXPECT_DOUBLE_EQ(c.leg_distance, 50.0 / inst.diagonal());
  EXPECT_EQ(c.window_slack, 0.0);
  EXPECT_EQ(c.wait_time, 0.0);
  EXPECT_EQ(c.delta_vs_closest, 0.0);
  EXPECT_EQ(c.next_cost, 0.0);
  EXPECT_EQ(c.sole_server, 0.0);
  EXPECT_EQ(c.direction_bonus, 0.0);
}

TEST(StepContext, InfeasiblePair) {
  auto inst = make_instance({{30, 40, 1, 0, 4}}, 1, 100, 10.0);
  EXPECT_THROW(build_step_context(SimState::reset(inst), 0, 0), ContractViolation);
}
