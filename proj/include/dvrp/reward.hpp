#pragma once

#include <array>
#include <cstddef>

#include "dvrp/features.hpp"

namespace dvrp {

struct RewardWeights {
  std::array<double, 7> a{0.2, 0.5, 1.0, 0.25, 0.5, 0.1, 0.25};
  double gamma = 0.9;
};

// Step reward terms, in feature units (distances / D, times / tau).
struct StepContext {
  double leg_distance = 0.0;
  double window_slack = 0.0;
  double wait_time = 0.0;
  double delta_vs_closest = 0.0;
  double next_cost = 0.0;
  double direction_bonus = 0.0;
  double sole_server = 0.0;
};

double step_reward(const StepContext& ctx, const RewardWeights& w = {});

// Throws ContractViolation if (k, j) is not feasible.
StepContext build_step_context(const FeatureContext& fc, int k, std::size_t j);
StepContext build_step_context(const SimState& s, int k, std::size_t j);

// Context of vehicle k heading back to the depot: only the leg length and the
// direction bonus are non-zero.
StepContext build_depot_context(const SimState& s, int k);

// step + gamma^(N_k - n) * F. Throws ContractViolation unless 1 <= n <= N_k.
double total_reward(double step, double fulfilment, int n_total, int n, double gamma);

}  // namespace dvrp
