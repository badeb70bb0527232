#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dvrp/core.hpp"
#include "helpers.hpp"

using namespace dvrp;
using dvrp::testing::make_instance;

TEST(Distance, IdenticalPointsAreZero) { EXPECT_EQ(distance({0, 0}, {0, 0}), 0.0); }

TEST(Distance, ThreeFourFive) { EXPECT_DOUBLE_EQ(distance({0, 0}, {3, 4}), 5.0); }

TEST(Distance, MapDiagonal) {
  EXPECT_NEAR(distance({-100, -100}, {100, 100}), 282.8427, 1e-4);
}

TEST(Distance, SymmetricAndTriangleOnRandomTriples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  for (int t = 0; t < 1000; ++t) {
    Location a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    EXPECT_EQ(distance(a, b), distance(b, a));
    EXPECT_LE(distance(a, c), distance(a, b) + distance(b, c) + 1e-9);
  }
}

TEST(RouteMetrics, OutAndBack) {
  auto inst = make_instance({{6, 8, 1, 0, 1000}});
  const std::size_t seq[] = {0};
  auto r = schedule_route(inst, 0, seq);
  EXPECT_DOUBLE_EQ(route_metrics(inst, r).distance, 20.0);
}

TEST(RouteMetrics, EmptyRoute) {
  auto inst = make_instance({{6, 8, 1, 0, 1000}});
  Route r;
  auto m = route_metrics(inst, r);
  EXPECT_EQ(m.distance, 0.0);
  EXPECT_EQ(m.load, 0.0);
}

TEST(RouteMetrics, TwoCustomerLegSum) {
  auto inst = make_instance({{3, 4, 2, 0, 1000}, {3, 0, 5, 0, 1000}});
  const std::size_t seq[] = {0, 1};
  auto r = schedule_route(inst, 0, seq);
  auto m = route_metrics(inst, r);
  EXPECT_DOUBLE_EQ(m.distance, 12.0);
  EXPECT_DOUBLE_EQ(m.load, 7.0);
  EXPECT_DOUBLE_EQ(r.distance, 12.0);
}

TEST(RouteMetrics, PermutationsMatchIndependentLegSum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<dvrp::testing::C> cs;
  for (int i = 0; i < 6; ++i) {
    cs.push_back({u(rng), u(rng), 1, 0, 1e6});
  }
  auto inst = make_instance(cs, 1, 100, 1.0, {1.5, -2.0});
  std::vector<std::size_t> seq(6);
  std::iota(seq.begin(), seq.end(), 0);
  do {
    auto r = schedule_route(inst, 0, seq);
    double d = std::hypot(cs[seq[0]].x - 1.5, cs[seq[0]].y + 2.0);
    for (std::size_t p = 1; p < seq.size(); ++p) {
      d += std::hypot(cs[seq[p]].x - cs[seq[p - 1]].x, cs[seq[p]].y - cs[seq[p - 1]].y);
    }
    d += std::hypot(cs[seq.back()].x - 1.5, cs[seq.back()].y + 2.0);
    ASSERT_NEAR(route_metrics(inst, r).distance, d, 1e-9);
  } while (std::next_permutation(seq.begin(), seq.end()));
}

TEST(Validate, EmptyInstanceEmptySolutionPasses) {
  Instance inst("empty", {0, 0}, std::nullopt, {}, {1, 10, 1});
  auto sol = assemble_solution(inst, {});
  EXPECT_TRUE(validate_solution(inst, sol).ok());
  EXPECT_EQ(sol.fulfilment, 1.0);
}

TEST(Validate, OverloadedRouteCitesCapacity) {
  auto inst = make_instance({{3, 4, 150, 0, 1000}}, 1, 100);
  const std::size_t seq[] = {0};
  auto sol = assemble_solution(inst, {schedule_route(inst, 0, seq)});
  auto rep = validate_solution(inst, sol);
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(rep.has(ConstraintKind::Capacity));
  EXPECT_FALSE(rep.has(ConstraintKind::TimeWindow));
}

TEST(Validate, LateArrivalCitesTimeWindow) {
  auto inst = make_instance({{3, 4, 1, 0, 10}}, 1, 100);
  const std::size_t seq[] = {0};
  auto route = schedule_route(inst, 0, seq);
  route.depot_departure = 6.0;
  route.visits[0].arrival = 11.0;
  route.visits[0].service_start = 11.0;
  route.visits[0].departure = 11.0;
  route.depot_return = 16.0;
  auto sol = assemble_solution(inst, {route});
  auto rep = validate_solution(inst, sol);
  EXPECT_TRUE(rep.has(ConstraintKind::TimeWindow));
}

TEST(Validate, DuplicateServiceCitesUniqueness) {
  auto inst = make_instance({{3, 4, 1, 0, 1000}, {3, 0, 1, 0, 1000}});
  const std::size_t a[] = {0, 1};
  const std::size_t b[] = {0};
  auto sol = assemble_solution(inst, {schedule_route(inst, 0, a), schedule_route(inst, 1, b)});
  EXPECT_TRUE(validate_solution(inst, sol).has(ConstraintKind::Uniqueness));
}

TEST(Validate, TeleportingVehicleCitesTravelTime) {
  auto inst = make_instance({{30, 40, 1, 0, 1000}, {60, 80, 1, 0, 1000}});
  const std::size_t seq[] = {0, 1};
  auto route = schedule_route(inst, 0, seq);
  route.visits[1].arrival = route.visits[0].departure + 1.0;
  route.visits[1].service_start = route.visits[1].arrival;
  route.visits[1].departure = route.visits[1].arrival;
  route.depot_return = route.visits[1].departure + 100.0;
  auto sol = assemble_solution(inst, {route});
  EXPECT_TRUE(validate_solution(inst, sol).has(ConstraintKind::TravelTime));
}

TEST(Validate, DepotDueEnforcedOnlyWhenPresent) {
  auto loose = make_instance({{30, 40, 1, 0, 1000}});
  auto tight = make_instance({{30, 40, 1, 0, 1000}}, 2, 100, 1.0, {0, 0}, 60.0);
  const std::size_t seq[] = {0};
  auto r1 = assemble_solution(loose, {schedule_route(loose, 0, seq)});
  auto r2 = assemble_solution(tight, {schedule_route(tight, 0, seq)});
  EXPECT_TRUE(validate_solution(loose, r1).ok());
  EXPECT_TRUE(validate_solution(tight, r2).has(ConstraintKind::DepotDue));
}

TEST(Validate, UnknownCustomerIsStructuralError) {
  auto inst = make_instance({{3, 4, 1, 0, 1000}});
  const std::size_t seq[] = {0};
  auto sol = assemble_solution(inst, {schedule_route(inst, 0, seq)});
  sol.routes[0].visits[0].customer_id = 99;
  EXPECT_THROW(validate_solution(inst, sol), StructureError);
}

TEST(Validate, UnservedCustomersLowerFulfilment) {
  auto inst = make_instance({{3, 4, 1, 0, 1000}, {3, 0, 1, 0, 1000}});
  const std::size_t seq[] = {1};
  auto sol = assemble_solution(inst, {schedule_route(inst, 0, seq)});
  EXPECT_TRUE(validate_solution(inst, sol).ok());
  EXPECT_DOUBLE_EQ(sol.fulfilment, 0.5);
  EXPECT_EQ(sol.unserved, std::set<int>{1});
  EXPECT_EQ(sol.vehicles_used, 1);
}

TEST(Instance, NeighboursSortedByDistance) {
  auto inst = make_instance({{0, 1, 1, 0, 9}, {0, 5, 1, 0, 9}, {0, 2, 1, 0, 9}, {0, 0, 1, 0, 9}});
  auto nb = inst.neighbours(0);
  std::vector<std::uint32_t> got(nb.begin(), nb.end());
  EXPECT_EQ(got, (std::vector<std::uint32_t>{0, 2, 3, 1}));
}
