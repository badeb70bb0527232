#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvrp/features.hpp"

namespace dvrp {

class WeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<int> kDefaultLayers{12, 6, 3, 1};

// Dense network, tanh on hidden layers and a linear output. Parameters live in
// one flat array: for each layer the (out x in) weights row-major, then biases.
class Network {
 public:
  explicit Network(std::vector<int> sizes = kDefaultLayers);

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static Network initialized(std::uint64_t seed, std::vector<int> sizes = kDefaultLayers);

  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const;

  // Episodes of training behind these parameters, carried in the weights file.
  int episodes() const { return episodes_; }
  void set_episodes(int n) { episodes_ = n; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Throws ContractViolation on wrong input length.
  double forward(std::span<const double> x) const;

  // Mean squared error over the batch and its gradient w.r.t. params().
  double loss_and_gradient(std::span<const FeatureVector> xs, std::span<const double> targets,
                           std::vector<double>& grad) const;
  double loss(std::span<const FeatureVector> xs, std::span<const double> targets) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  int episodes_ = 0;
};

struct Adam {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;

  void step(std::vector<double>& params, const std::vector<double>& grad);
};

// One Adam step on the batch MSE. Returns the loss before the step. Throws
// ContractViolation on an empty batch or non-finite targets.
double train_batch(Network& net, Adam& adam, std::span<const FeatureVector> xs,
                   std::span<const double> targets);

struct Experience {
  FeatureVector x{};
  double step_reward = 0.0;
  double q_pred = 0.0;  // kept for diagnostics only
  int episode = 0;
  int stage = 0;
  int vehicle = 0;
  double target = 0.0;  // step reward plus discounted terminal bonus
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 50000) : capacity_(capacity) {}

  void push(const Experience& e);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Experience& operator[](std::size_t i) const { return data_[i]; }

  // Uniform without replacement; nullopt when fewer than batch_size entries.
  std::optional<std::vector<Experience>> sample(std::size_t batch_size,
                                                std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Experience> data_;
};

// Text format: "dvrp-valuenet 1", "layers <L> <sizes...>", "episodes <n>", then
// one line per layer holding its weights row-major followed by its biases, as
// hex floats.
void save_weights(std::ostream& out, const Network& net);
void save_weights(const std::string& path, const Network& net);
Network load_weights(std::istream& in, const std::vector<int>& expected = kDefaultLayers);
Network load_weights(const std::string& path, const std::vector<int>& expected = kDefaultLayers);

}  // namespace dvrp
