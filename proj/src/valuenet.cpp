#include "dvrp/valuenet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace dvrp {

Network::Network(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2 || std::any_of(sizes_.begin(), sizes_.end(), [](int n) { return n < 1; })) {
    throw ContractViolation("network needs at least two positive layer sizes");
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(off);
    off += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l] + 1);
  }
  params_.assign(off, 0.0);
}

std::size_t Network::bias_offset(std::size_t layer) const {
  return offsets_[layer] +
         static_cast<std::size_t>(sizes_[layer + 1]) * static_cast<std::size_t>(sizes_[layer]);
}

Network Network::initialized(std::uint64_t seed, std::vector<int> sizes) {
  Network net(std::move(sizes));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    const std::size_t end = l + 1 < net.layer_count() ? net.offsets_[l + 1] : net.params_.size();
    for (std::size_t p = net.offsets_[l]; p < end; ++p) {
      net.params_[p] = u(rng);
    }
  }
  return net;
}

double Network::forward(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(sizes_.front())) {
    throw ContractViolation(
        fmt::format("network input has {} entries, expected {}", x.size(), sizes_.front()));
  }
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> z;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const auto in = static_cast<std::size_t>(sizes_[l]);
    const auto out = static_cast<std::size_t>(sizes_[l + 1]);
    const double* w = params_.data() + offsets_[l];
    const double* b = params_.data() + bias_offset(l);
    z.assign(out, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = b[r];
      for (std::size_t c = 0; c < in; ++c) {
        acc += w[r * in + c] * a[c];
      }
      z[r] = l + 1 < layer_count() ? std::tanh(acc) : acc;
    }
    a.swap(z);
  }
  return a[0];
}

double Network::loss_and_gradient(std::span<const FeatureVector> xs,
                                  std::span<const double> targets,
                                  std::vector<double>& grad) const {
  if (xs.empty() || xs.size() != targets.size()) {
    throw ContractViolation("batch must be non-empty with one target per input");
  }
  if (static_cast<std::size_t>(sizes_.front()) != kFeatureCount || sizes_.back() != 1) {
    throw ContractViolation("batch training needs a 12-input, 1-output network");
  }
  grad.assign(params_.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(xs.size());
  const std::size_t L = layer_count();
  std::vector<std::vector<double>> acts(L + 1);
  double total = 0.0;

  for (std::size_t s = 0; s < xs.size(); ++s) {
    acts[0].assign(xs[s].begin(), xs[s].end());
    for (std::size_t l = 0; l < L; ++l) {
      const auto in = static_cast<std::size_t>(sizes_[l]);
      const auto out = static_cast<std::size_t>(sizes_[l + 1]);
      const double* w = params_.data() + offsets_[l];
      const double* b = params_.data() + bias_offset(l);
      acts[l + 1].assign(out, 0.0);
      for (std::size_t r = 0; r < out; ++r) {
        double acc = b[r];
        for (std::size_t c = 0; c < in; ++c) {
          acc += w[r * in + c] * acts[l][c];
        }
        acts[l + 1][r] = l + 1 < L ? std::tanh(acc) : acc;
      }
    }
    const double err = acts[L][0] - targets[s];
    total += err * err;

    // delta holds dLoss/dz for the current layer.
    std::vector<double> delta{2.0 * err * scale};
    for (std::size_t l = L; l-- > 0;) {
      const auto in = static_cast<std::size_t>(sizes_[l]);
      const auto out = static_cast<std::size_t>(sizes_[l + 1]);
      const double* w = params_.data() + offsets_[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = grad.data() + bias_offset(l);
      std::vector<double> prev(in, 0.0);
      for (std::size_t r = 0; r < out; ++r) {
        gb[r] += delta[r];
        for (std::size_t c = 0; c < in; ++c) {
          gw[r * in + c] += delta[r] * acts[l][c];
          prev[c] += w[r * in + c] * delta[r];
        }
      }
      if (l > 0) {
        for (std::size_t c = 0; c < in; ++c) {
          prev[c] *= 1.0 - acts[l][c] * acts[l][c];
        }
      }
      delta.swap(prev);
    }
  }
  return total * scale;
}

double Network::loss(std::span<const FeatureVector> xs, std::span<const double> targets) const {
  double total = 0.0;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    const double err = forward(xs[s]) - targets[s];
    total += err * err;
  }
  return xs.empty() ? 0.0 : total / static_cast<double>(xs.size());
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (m.size() != params.size()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }
  ++t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    m[p] = beta1 * m[p] + (1.0 - beta1) * grad[p];
    v[p] = beta2 * v[p] + (1.0 - beta2) * grad[p] * grad[p];
    params[p] -= lr * (m[p] / c1) / (std::sqrt(v[p] / c2) + eps);
  }
}

double train_batch(Network& net, Adam& adam, std::span<const FeatureVector> xs,
                   std::span<const double> targets) {
  if (std::any_of(targets.begin(), targets.end(), [](double t) { return !std::isfinite(t); })) {
    throw ContractViolation("non-finite training target");
  }
  std::vector<double> grad;
  const double loss = net.loss_and_gradient(xs, targets, grad);
  adam.step(net.params(), grad);
  return loss;
}

void ReplayBuffer::push(const Experience& e) {
  data_.push_back(e);
  while (data_.size() > capacity_) {
    data_.pop_front();
  }
}

std::optional<std::vector<Experience>> ReplayBuffer::sample(std::size_t batch_size,
                                                            std::mt19937_64& rng) const {
  if (batch_size == 0 || data_.size() < batch_size) {
    return std::nullopt;
  }
  std::vector<std::size_t> all(data_.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> picked;
  picked.reserve(batch_size);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), batch_size, rng);
  std::shuffle(picked.begin(), picked.end(), rng);
  std::vector<Experience> out;
  out.reserve(batch_size);
  for (auto i : picked) {
    out.push_back(data_[i]);
  }
  return out;
}

void save_weights(std::ostream& out, const Network& net) {
  out << "dvrp-valuenet 1\n";
  out << "layers " << net.sizes().size();
  for (int n : net.sizes()) {
    out << ' ' << n;
  }
  out << '\n';
  out << "episodes " << net.episodes() << '\n';
  const auto& p = net.params();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t end = l + 1 < net.layer_count() ? net.weight_offset(l + 1) : p.size();
    for (std::size_t i = net.weight_offset(l); i < end; ++i) {
      out << fmt::format("{:a}", p[i]) << (i + 1 < end ? ' ' : '\n');
    }
  }
}

void save_weights(const std::string& path, const Network& net) {
  std::ofstream out(path);
  if (!out) {
    throw WeightsError("cannot write weights file " + path);
  }
  save_weights(out, net);
}

Network load_weights(std::istream& in, const std::vector<int>& expected) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "dvrp-valuenet") {
    throw WeightsError("not a value-network weights file");
  }
  if (version != 1) {
    throw WeightsError(fmt::format("unsupported weights version {}", version));
  }
  std::string tag;
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "layers" || count < 2 || count > 64) {
    throw WeightsError("missing layer header");
  }
  std::vector<int> sizes(count);
  for (auto& n : sizes) {
    if (!(in >> n)) {
      throw WeightsError("truncated layer header");
    }
  }
  if (sizes != expected) {
    throw WeightsError(fmt::format("layer sizes ({}) do not match expected ({})",
                                   fmt::join(sizes, ","), fmt::join(expected, ",")));
  }
  Network net(sizes);
  int episodes = 0;
  if (!(in >> tag >> episodes) || tag != "episodes" || episodes < 0) {
    throw WeightsError("missing episode count");
  }
  net.set_episodes(episodes);
  std::string tok;
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    if (!(in >> tok)) {
      throw WeightsError(fmt::format("truncated weights: read {} of {} parameters", i,
                                     net.params().size()));
    }
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
      throw WeightsError(fmt::format("bad parameter value '{}' at index {}", tok, i));
    }
    net.params()[i] = v;
  }
  if (in >> tok) {
    throw WeightsError("trailing data after weights");
  }
  return net;
}

Network load_weights(const std::string& path, const std::vector<int>& expected) {
  std::ifstream in(path);
  if (!in) {
    throw WeightsError("cannot open weights file " + path);
  }
  return load_weights(in, expected);
}

}  // namespace dvrp
