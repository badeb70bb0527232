#include "dvrp/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

namespace dvrp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool has_feasible_customer(const SimState& s, int k) {
  return std::any_of(s.active().begin(), s.active().end(),
                     [&](std::size_t i) { return s.can_serve(k, i); });
}

}  // namespace

double EpsilonSchedule::at(int episode) const {
  if (decay_episodes <= 0 || episode >= decay_episodes) {
    return end;
  }
  const double frac = static_cast<double>(std::max(episode, 0)) / decay_episodes;
  return std::max(end, start + (end - start) * frac);
}

std::vector<Commitment> decision_epoch(const SimState& s, std::span<const int> triggers,
                                       const Network& net, double epsilon, std::mt19937_64& rng,
                                       const RewardWeights& weights) {
  std::vector<int> open;
  for (int k : triggers) {
    if (s.is_free(k)) {
      open.push_back(k);
    }
  }
  std::sort(open.begin(), open.end());
  open.erase(std::unique(open.begin(), open.end()), open.end());

  SimState soft = s.clone_for_soft();
  std::vector<Commitment> out;
  auto decided = [&](int k) {
    return std::any_of(out.begin(), out.end(), [k](const Commitment& c) { return c.vehicle == k; });
  };

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t bound = s.active().size() + s.vehicles().size() + 1;
  for (std::size_t iter = 0; iter <= bound; ++iter) {
    // Triggers left without any feasible customer give up for this epoch.
    for (int k : open) {
      if (decided(k) || has_feasible_customer(soft, k)) {
        continue;
      }
      Commitment c;
      c.vehicle = k;
      // An unused vehicle waits at the depot for hidden customers; otherwise
      // it is released for good.
      if (s.is_unused(k) && s.pending_count() > 0) {
        c.action = Action::Stay;
      } else {
        c.action = Action::Depot;
        FeatureContext fc(soft);
        c.x = fc.depot_features(k);
        c.q = net.forward(c.x);
        c.step_reward = step_reward(build_depot_context(soft, k), weights);
        soft.send_to_depot(k);
      }
      out.push_back(c);
    }
    if (out.size() == open.size()) {
      break;
    }

    const auto pairs = soft.feasible_pairs();
    if (pairs.empty()) {
      break;
    }
    FeatureContext fc(soft);
    std::size_t pick = 0;
    double q = 0.0;
    FeatureVector x{};
    if (epsilon > 0.0 && unit(rng) < epsilon) {
      pick = std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng);
      x = fc.features(pairs[pick].vehicle, pairs[pick].customer);
      q = net.forward(x);
    } else {
      // Vehicles still idle at the depot see identical features, so only the
      // lowest-id one of them can win a tie; the others are skipped.
      std::optional<int> idle_rep;
      for (const auto& v : soft.vehicles()) {
        if (soft.is_unused(v.id) && !v.has_commitment()) {
          idle_rep = v.id;
          break;
        }
      }
      double best = -std::numeric_limits<double>::infinity();
      bool have = false;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const int pk = pairs[p].vehicle;
        if (idle_rep && pk != *idle_rep && soft.is_unused(pk) && !soft.vehicle(pk).has_commitment()) {
          continue;
        }
        const auto f = fc.features(pairs[p].vehicle, pairs[p].customer);
        const double v = net.forward(f);
        // Pairs come ordered by vehicle then customer, so strict > keeps the
        // lowest ids on ties.
        if (v > best || !have) {
          have = true;
          best = v;
          pick = p;
          x = f;
        }
      }
      q = best;
    }

    const auto [k, i] = pairs[pick];
    if (std::binary_search(open.begin(), open.end(), k) && !decided(k)) {
      Commitment c;
      c.vehicle = k;
      c.action = Action::Customer;
      c.customer = i;
      c.x = x;
      c.q = q;
      c.step_reward = step_reward(build_step_context(fc, k, i), weights);
      out.push_back(c);
    }
    soft.apply_assignment(k, i);
  }

  std::sort(out.begin(), out.end(),
            [](const Commitment& a, const Commitment& b) { return a.vehicle < b.vehicle; });
  return out;
}

void apply_commitments(SimState& s, std::span<const Commitment> commitments) {
  for (const auto& c : commitments) {
    switch (c.action) {
      case Action::Customer:
        s.apply_assignment(c.vehicle, c.customer);
        break;
      case Action::Depot:
        s.send_to_depot(c.vehicle);
        break;
      case Action::Stay:
        break;
    }
  }
}

EpisodeResult run_episode(const Instance& inst, const Network& net, std::mt19937_64& rng,
                          const EpisodeOptions& opts) {
  const auto t0 = Clock::now();
  EpisodeResult result;
  SimState s = SimState::reset(inst, opts.honor_reveals);
  std::vector<std::vector<Experience>> trail(static_cast<std::size_t>(inst.fleet().count));

  std::vector<int> triggers = s.free_vehicles();
  const std::size_t guard = 4 * (inst.size() + 1) * static_cast<std::size_t>(inst.fleet().count + 1) + 64;
  for (std::size_t epochs = 0;; ++epochs) {
    if (epochs > guard) {
      throw std::logic_error("episode failed to make progress");
    }
    if (!triggers.empty()) {
      const auto te = Clock::now();
      const auto cs = decision_epoch(s, triggers, net, opts.epsilon, rng, opts.weights);
      result.epoch_latency_sec.push_back(seconds_since(te));
      if (opts.record) {
        for (const auto& c : cs) {
          const auto& v = s.vehicle(c.vehicle);
          const bool counts = c.action == Action::Customer || (c.action == Action::Depot && !v.trip.empty());
          if (!counts) {
            continue;
          }
          Experience e;
          e.x = c.x;
          e.step_reward = c.step_reward;
          e.q_pred = c.q;
          e.episode = opts.episode;
          e.stage = v.visits_so_far + 1;
          e.vehicle = c.vehicle;
          trail[static_cast<std::size_t>(c.vehicle)].push_back(e);
        }
      }
      apply_commitments(s, cs);
    }
    const auto epoch = s.advance();
    if (!epoch) {
      break;
    }
    if (opts.record) {
      for (int k : epoch->released) {
        auto& t = trail[static_cast<std::size_t>(k)];
        if (!t.empty()) {
          t.pop_back();
        }
      }
    }
    triggers = epoch->vehicles;
  }

  result.solution = s.finalize();
  result.solution.wall_time_sec = seconds_since(t0);

  if (opts.record) {
    const double F = result.solution.fulfilment;
    for (auto& t : trail) {
      const int N = static_cast<int>(t.size());
      for (int n = 1; n <= N; ++n) {
        auto& e = t[static_cast<std::size_t>(n - 1)];
        e.stage = n;
        e.target = total_reward(e.step_reward, F, N, n, opts.weights.gamma);
        result.experiences.push_back(e);
      }
    }
  }
  return result;
}

TrainResult train(const TrainConfig& cfg, std::optional<Network> initial) {
  TrainResult result{initial ? std::move(*initial) : Network::initialized(cfg.seed), {}};
  if (cfg.n_episodes <= 0) {
    return result;
  }
  if (cfg.training_instances < 1 || cfg.batch < 1 || cfg.buffer < 1) {
    throw ContractViolation("training needs positive instance count, batch and buffer sizes");
  }
  const auto set = generate_training_set(cfg.generator, cfg.training_instances);
  Adam adam;
  adam.lr = cfg.learning_rate;
  ReplayBuffer buffer(cfg.buffer);
  std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
  std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);

  for (int e = 0; e < cfg.n_episodes; ++e) {
    const int episode = cfg.start_episode + e;
    EpisodeOptions opts;
    opts.epsilon = cfg.epsilon.at(episode);
    opts.record = true;
    opts.episode = episode;
    opts.weights = cfg.weights;
    const auto& inst = set[pick(rng)];
    auto run = run_episode(inst, result.net, rng, opts);
    for (const auto& x : run.experiences) {
      buffer.push(x);
    }

    double loss_sum = 0.0;
    int updates = 0;
    for (int u = 0; u < cfg.updates_per_episode; ++u) {
      auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch), rng);
      if (!batch) {
        break;
      }
      std::vector<FeatureVector> xs;
      std::vector<double> ys;
      for (const auto& b : *batch) {
        xs.push_back(b.x);
        ys.push_back(b.target);
      }
      loss_sum += train_batch(result.net, adam, xs, ys);
      ++updates;
    }
    result.curve.push_back({episode, run.solution.fulfilment, run.solution.total_distance,
                            updates > 0 ? loss_sum / updates : std::nan(""), opts.epsilon});
  }
  result.net.set_episodes(cfg.start_episode + cfg.n_episodes);
  return result;
}

SolveResult solve(const Instance& inst, const Network& net, bool dynamic,
                  const RewardWeights& weights) {
  std::mt19937_64 rng(0);
  EpisodeOptions opts;
  opts.honor_reveals = dynamic;
  opts.weights = weights;
  auto run = run_episode(inst, net, rng, opts);
  return {std::move(run.solution), std::move(run.epoch_latency_sec)};
}

}  // namespace dvrp
