#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dvrp/valuenet.hpp"

namespace dvrp::testing {

// Largest relative gap between the analytic gradient and central differences
// on a single (x, target) pair. Entries where both sides are below `floor`
// are compared absolutely.
inline double gradient_check(const Network& net, const FeatureVector& x, double target,
                             double h = 1e-5, double floor = 1e-6) {
  std::vector<double> grad;
  const FeatureVector xs[] = {x};
  const double ts[] = {target};
  net.loss_and_gradient(xs, ts, grad);
  Network probe = net;
  double worst = 0.0;
  for (std::size_t p = 0; p < grad.size(); ++p) {
    const double orig = probe.params()[p];
    probe.params()[p] = orig + h;
    const double up = probe.loss(xs, ts);
    probe.params()[p] = orig - h;
    const double down = probe.loss(xs, ts);
    probe.params()[p] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(grad[p]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(grad[p] - numeric) / scale);
  }
  return worst;
}

inline FeatureVector random_features(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeatureVector x;
  for (auto& v : x) {
    v = u(rng);
  }
  return x;
}

}  // namespace dvrp::testing
