#include <gtest/gtest.h>

#include <random>

#include "dvrp/env.hpp"
#include "dvrp/instance_io.hpp"
#include "helpers.hpp"

using namespace dvrp;
using dvrp::testing::make_instance;

namespace {

std::size_t conserved(const SimState& s) {
  return s.count(CustomerStatus::Pending) + s.count(CustomerStatus::Active) +
         s.count(CustomerStatus::Assigned) + s.count(CustomerStatus::Served) +
         s.count(CustomerStatus::Dropped);
}

bool has_pair(const std::vector<Pair>& ps, int k, std::size_t i) {
  return std::find(ps.begin(), ps.end(), Pair{k, i}) != ps.end();
}

}  // namespace

TEST(Reset, AllStaticAreActive) {
  GeneratorConfig cfg;
  auto s = SimState::reset(generate_training_instance(cfg));
  EXPECT_EQ(s.active().size(), 20u);
  EXPECT_EQ(s.pending_count(), 0u);
  EXPECT_EQ(s.clock(), 0.0);
  for (const auto& v : s.vehicles()) {
    EXPECT_EQ(v.status, VehicleStatus::AtDepot);
    EXPECT_EQ(v.remaining_capacity, 200.0);
  }
}

TEST(Reset, TenPercentDynamicityLeavesNinetyActive) {
  auto inst = apply_dynamicity(load_solomon(dvrp::testing::solomon("R201")), {0.1, 4});
  auto s = SimState::reset(inst);
  EXPECT_EQ(s.active().size() + s.count(CustomerStatus::Dropped), 90u);
  EXPECT_EQ(s.pending_count(), 10u);
  auto st = SimState::reset(inst, false);
  EXPECT_EQ(st.active().size(), 100u);
}

TEST(Reset, ZeroCustomersIsTerminal) {
  Instance inst("empty", {0, 0}, std::nullopt, {}, {2, 10, 1});
  auto s = SimState::reset(inst);
  EXPECT_TRUE(s.is_terminal());
  EXPECT_FALSE(s.advance());
  EXPECT_EQ(s.finalize().fulfilment, 1.0);
}

TEST(FeasiblePairs, OverweightCustomerInNoPair) {
  auto inst = make_instance({{1, 1, 300, 0, 100}, {2, 2, 10, 0, 100}}, 3, 200);
  auto s = SimState::reset(inst);
  for (const auto& p : s.feasible_pairs()) {
    EXPECT_NE(p.customer, 0u);
  }
  EXPECT_EQ(s.status(0), CustomerStatus::Dropped);
}

TEST(FeasiblePairs, UnreachableWindowExcluded) {
  auto inst = make_instance({{30, 40, 1, 0, 4.9}, {30, 40, 1, 0, 5.0}}, 1, 100, 10.0);
  auto s = SimState::reset(inst);
  auto ps = s.feasible_pairs();
  EXPECT_FALSE(has_pair(ps, 0, 0));
  EXPECT_TRUE(has_pair(ps, 0, 1));
}

TEST(FeasiblePairs, BusyVehicleNearbyIsListed) {
  // k' (vehicle 0) is committed to a stop next to i; k (vehicle 1) waits at the depot far away.
  auto inst = make_instance({{100, 0, 1, 0, 1000}, {101, 0, 1, 0, 1000}}, 2, 100, 1.0);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  auto ps = s.feasible_pairs();
  EXPECT_TRUE(has_pair(ps, 0, 1));
  EXPECT_TRUE(has_pair(ps, 1, 1));
  auto p = s.project(0, 1);
  EXPECT_DOUBLE_EQ(p.arrival, 101.0);
  EXPECT_DOUBLE_EQ(s.project(1, 1).arrival, 101.0);
  EXPECT_DOUBLE_EQ(p.leg, 1.0);
}

TEST(FeasiblePairs, DepotDueLimitsPairs) {
  auto inst = make_instance({{30, 40, 1, 0, 100, 10}}, 1, 100, 1.0, {0, 0}, 109.0);
  EXPECT_TRUE(SimState::reset(inst).feasible_pairs().empty());
  auto ok = make_instance({{30, 40, 1, 0, 100, 10}}, 1, 100, 1.0, {0, 0}, 110.0);
  EXPECT_EQ(SimState::reset(ok).feasible_pairs().size(), 1u);
}

TEST(Assignment, ArrivalAndFreeTime) {
  auto inst = make_instance({{30, 40, 5, 0, 100}}, 1, 100, 10.0);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  const auto& v = s.vehicle(0);
  ASSERT_EQ(v.trip.size(), 1u);
  EXPECT_DOUBLE_EQ(v.trip[0].arrival, 5.0);
  EXPECT_DOUBLE_EQ(v.free_at, 5.0);
  EXPECT_DOUBLE_EQ(v.remaining_capacity, 95.0);
  EXPECT_EQ(v.visits_so_far, 1);
  EXPECT_EQ(s.status(0), CustomerStatus::Assigned);
  EXPECT_TRUE(s.active().empty());
}

TEST(Assignment, WaitsUntilDepartureTime) {
  auto inst = make_instance({{30, 40, 5, 20, 100}}, 1, 100, 10.0);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  const auto& v = s.vehicle(0);
  EXPECT_DOUBLE_EQ(v.trip[0].depart, 15.0);
  EXPECT_DOUBLE_EQ(v.trip[0].arrival, 20.0);
  EXPECT_DOUBLE_EQ(v.trip[0].service_start, 20.0);
  EXPECT_DOUBLE_EQ(v.free_at, 20.0);
  EXPECT_TRUE(s.is_waiting(0));
}

TEST(Assignment, ExactCapacityLeavesZero) {
  auto inst = make_instance({{3, 4, 100, 0, 100}}, 1, 100);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  EXPECT_EQ(s.vehicle(0).remaining_capacity, 0.0);
}

TEST(Assignment, InfeasiblePairRejectedStateUnchanged) {
  auto inst = make_instance({{3, 4, 60, 0, 100}, {3, 5, 60, 0, 100}}, 2, 100);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  const auto before = s.vehicle(0).remaining_capacity;
  EXPECT_THROW(s.apply_assignment(0, 1), ContractViolation);
  EXPECT_EQ(s.vehicle(0).remaining_capacity, before);
  EXPECT_EQ(s.status(1), CustomerStatus::Active);
}

TEST(SendToDepot, UnusedVehicleAddsNothing) {
  auto inst = make_instance({{3, 4, 1, 0, 100}}, 2, 100);
  auto s = SimState::reset(inst);
  s.send_to_depot(1);
  EXPECT_TRUE(s.vehicle(1).retired());
  for (const auto& p : s.feasible_pairs()) {
    EXPECT_NE(p.vehicle, 1);
  }
  s.apply_assignment(0, 0);
  while (s.advance()) {
  }
  auto sol = s.finalize();
  EXPECT_EQ(sol.vehicles_used, 1);
  EXPECT_DOUBLE_EQ(sol.total_distance, 10.0);
}

TEST(SendToDepot, FromCustomerAddsReturnLeg) {
  auto inst = make_instance({{3, 4, 1, 0, 100}, {30, 40, 1, 0, 100}}, 2, 100);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  s.advance();
  s.send_to_depot(0);
  EXPECT_TRUE(s.vehicle(0).retired());
  ASSERT_TRUE(s.vehicle(0).depot_return);
  EXPECT_DOUBLE_EQ(*s.vehicle(0).depot_return, 10.0);
  EXPECT_FALSE(has_pair(s.feasible_pairs(), 0, 1));
}

TEST(Advance, EventsInTimeOrderWithRevealBetween) {
  auto inst = make_instance({{5, 0, 1, 0, 100}, {7, 0, 1, 0, 100}, {1, 0, 1, 7, 100, 0, 6}}, 3, 100);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  s.apply_assignment(1, 1);
  s.send_to_depot(2);
  std::vector<double> clocks;
  std::vector<std::vector<int>> who;
  while (auto e = s.advance()) {
    clocks.push_back(e->time);
    who.push_back(e->vehicles);
    if (clocks.size() == 3) {
      break;
    }
  }
  EXPECT_EQ(clocks, (std::vector<double>{5, 6, 7}));
  EXPECT_EQ(who[0], std::vector<int>{0});
  EXPECT_EQ(who[2], std::vector<int>{1});
}

TEST(Advance, SimultaneousFreeEventsAscendingIds) {
  auto inst = make_instance({{0, 5, 1, 0, 100}, {5, 0, 1, 0, 100}, {3, 4, 1, 0, 100}}, 3, 100);
  auto s = SimState::reset(inst);
  s.apply_assignment(2, 0);
  s.apply_assignment(0, 1);
  s.apply_assignment(1, 2);
  auto e = s.advance();
  ASSERT_TRUE(e);
  EXPECT_EQ(e->time, 5.0);
  EXPECT_EQ(e->vehicles, (std::vector<int>{0, 1, 2}));
}

TEST(Advance, RevealReleasesWaitingVehicle) {
  auto inst = make_instance({{10, 0, 1, 50, 100}, {0, 10, 1, 30, 100, 0, 5}}, 1, 100);
  auto s = SimState::reset(inst);
  s.apply_assignment(0, 0);
  ASSERT_TRUE(s.is_waiting(0));
  auto e = s.advance();
  ASSERT_TRUE(e);
  EXPECT_EQ(e->time, 5.0);
  EXPECT_TRUE(e->revealed);
  EXPECT_EQ(e->released, std::vector<int>{0});
  EXPECT_EQ(s.status(0), CustomerStatus::Active);
  EXPECT_EQ(s.active().size(), 2u);
}

TEST(Clone, IndependentCopies) {
  auto inst = make_instance({{3, 4, 10, 0, 100}, {6, 8, 10, 0, 100}}, 2, 100);
  auto s = SimState::reset(inst);
  auto c = s.clone_for_soft();
  c.apply_assignment(0, 0);
  EXPECT_EQ(s.active().size(), 2u);
  EXPECT_EQ(s.vehicle(0).remaining_capacity, 100.0);
  EXPECT_EQ(s.clock(), 0.0);
  auto cc = c.clone_for_soft();
  EXPECT_EQ(cc.active(), c.active());
  EXPECT_EQ(cc.vehicle(0).remaining_capacity, c.vehicle(0).remaining_capacity);
  EXPECT_EQ(cc.finalize(), c.clone_for_soft().finalize());
}

TEST(Finalize, EighteenOfTwenty) {
  std::vector<dvrp::testing::C> cs;
  for (int i = 0; i < 20; ++i) {
    cs.push_back({static_cast<double>(i + 1), 0, 1, 0, 1000});
  }
  auto inst = make_instance(cs, 1, 100);
  auto s = SimState::reset(inst);
  for (std::size_t i = 0; i < 18; ++i) {
    s.apply_assignment(0, i);
  }
  while (auto e = s.advance()) {
    if (!e->vehicles.empty()) {
      s.send_to_depot(0);
    }
  }
  auto sol = s.finalize();
  EXPECT_DOUBLE_EQ(sol.fulfilment, 0.9);
  EXPECT_EQ(sol.unserved, (std::set<int>{19, 20}));
  EXPECT_TRUE(validate_solution(inst, sol).ok());
}

TEST(Property, RandomPlayKeepsInvariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    GeneratorConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    cfg.n_customers = 5 + trial % 20;
    auto inst = generate_training_instance(cfg);
    if (trial % 2) {
      inst = apply_dynamicity(inst, {0.5, static_cast<std::uint64_t>(trial)});
    }
    auto s = SimState::reset(inst);
    std::vector<Pair> played;
    double last_clock = 0.0;
    std::vector<int> triggers = s.free_vehicles();
    for (int guard = 0; guard < 10000; ++guard) {
      for (int k : triggers) {
        std::vector<std::size_t> options;
        for (auto i : s.active()) {
          if (s.can_serve(k, i)) {
            options.push_back(i);
          }
        }
        if (options.empty()) {
          if (s.pending_count() == 0) {
            s.send_to_depot(k);
          }
          continue;
        }
        const auto i = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
        const double cap = s.vehicle(k).remaining_capacity;
        s.apply_assignment(k, i);
        played.push_back({k, i});
        ASSERT_LE(s.vehicle(k).remaining_capacity, cap);
        ASSERT_GE(s.vehicle(k).remaining_capacity, -kTolerance);
      }
      ASSERT_EQ(conserved(s), inst.size());
      auto e = s.advance();
      if (!e) {
        break;
      }
      ASSERT_GE(s.clock(), last_clock);
      last_clock = s.clock();
      triggers = e->vehicles;
    }
    auto sol = s.finalize();
    auto rep = validate_solution(inst, sol);
    ASSERT_TRUE(rep.ok()) << rep.summary();
  }
}

TEST(Property, ReplayIsBitIdentical) {
  GeneratorConfig cfg;
  cfg.seed = 5;
  auto inst = generate_training_instance(cfg);
  auto run = [&] {
    auto s = SimState::reset(inst);
    for (int round = 0; round < 30; ++round) {
      auto ps = s.feasible_pairs();
      if (ps.empty()) {
        break;
      }
      s.apply_assignment(ps[ps.size() / 2].vehicle, ps[ps.size() / 2].customer);
    }
    while (s.advance()) {
    }
    return s.finalize();
  };
  EXPECT_EQ(run(), run());
}
