#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "dvrp/env.hpp"
#include "dvrp/features.hpp"
#include "dvrp/instance_io.hpp"
#include "dvrp/reward.hpp"
#include "dvrp/valuenet.hpp"

namespace dvrp {

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.0;
  int decay_episodes = 300;

  // Episodes are numbered from 0; the value is held for a whole episode.
  double at(int episode) const;
};

enum class Action { Customer, Depot, Stay };

// A decision for one trigger vehicle. Stay keeps an unused vehicle parked at
// the depot while more customers may still be revealed.
struct Commitment {
  int vehicle = 0;
  Action action = Action::Depot;
  std::size_t customer = 0;
  FeatureVector x{};
  double step_reward = 0.0;
  double q = 0.0;
};

// Runs the soft-update loop on a clone of s and returns one commitment per
// trigger vehicle, in ascending vehicle id. s itself is not modified.
std::vector<Commitment> decision_epoch(const SimState& s, std::span<const int> triggers,
                                       const Network& net, double epsilon, std::mt19937_64& rng,
                                       const RewardWeights& weights = {});

void apply_commitments(SimState& s, std::span<const Commitment> commitments);

struct EpisodeOptions {
  double epsilon = 0.0;
  bool record = false;
  bool honor_reveals = true;
  int episode = 0;
  RewardWeights weights;
};

struct EpisodeResult {
  Solution solution;
  std::vector<Experience> experiences;  // targets filled when recording
  std::vector<double> epoch_latency_sec;
};

EpisodeResult run_episode(const Instance& inst, const Network& net, std::mt19937_64& rng,
                          const EpisodeOptions& opts = {});

struct TrainConfig {
  int n_episodes = 700;
  int batch = 32;
  std::size_t buffer = 50000;
  int updates_per_episode = 1;
  double learning_rate = 0.001;
  RewardWeights weights;
  EpsilonSchedule epsilon;
  std::uint64_t seed = 0;
  GeneratorConfig generator;
  int training_instances = 20;
  int start_episode = 0;  // continues numbering (and the epsilon schedule) when resuming
};

struct CurvePoint {
  int episode = 0;
  double fulfilment = 0.0;
  double distance = 0.0;
  double loss = 0.0;  // NaN while the buffer holds fewer samples than one batch
  double epsilon = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<CurvePoint> curve;
};

TrainResult train(const TrainConfig& cfg, std::optional<Network> initial = std::nullopt);

struct SolveResult {
  Solution solution;
  std::vector<double> epoch_latency_sec;
};

// Greedy run with fixed weights. Static mode ignores reveal times.
SolveResult solve(const Instance& inst, const Network& net, bool dynamic,
                  const RewardWeights& weights = {});

}  // namespace dvrp
