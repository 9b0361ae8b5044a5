#pragma once

#include <cmath>
#include <vector>

#include "nn/learner.hpp"

namespace testing_support {

using namespace edgeboost;

inline nn::NetworkSpec fc_net(int inputs, int classes) {
  nn::NetworkSpec s;
  s.input = {inputs, 1, 1};
  s.class_count = classes;
  s.layers = {nn::LayerSpec::fully_connected(classes), nn::LayerSpec::softmax()};
  return s;
}

inline nn::NetworkSpec small_conv_net(int filters = 4, int classes = 3) {
  nn::NetworkSpec s;
  s.input = {2, 6, 6};
  s.class_count = classes;
  s.layers = {nn::LayerSpec::conv(3, filters, 1, 1), nn::LayerSpec::avg_pool(2),
              nn::LayerSpec::conv(3, filters, 1, 0), nn::LayerSpec::fully_connected(classes),
              nn::LayerSpec::softmax()};
  return s;
}

inline nn::NetworkSpec bundled_baseline() {
  nn::NetworkSpec s;
  s.input = {3, 8, 8};
  s.class_count = 4;
  s.layers = {nn::LayerSpec::conv(3, 8, 1, 1),  nn::LayerSpec::avg_pool(2), nn::LayerSpec::conv(3, 16, 1, 1),
              nn::LayerSpec::avg_pool(2),       nn::LayerSpec::conv(3, 16, 1, 1), nn::LayerSpec::avg_pool(2),
              nn::LayerSpec::fully_connected(4), nn::LayerSpec::softmax()};
  return s;
}

// Central-difference gradient of sample_loss, computed independently of backprop.
inline nn::Parameters numeric_gradient(const nn::NetworkSpec& spec, nn::Parameters params,
                                       const std::vector<double>& input, int label, double weight,
                                       double h = 1e-5) {
  nn::Parameters g = nn::zero_parameters(spec);
  auto probe = [&](double& slot) {
    const double keep = slot;
    slot = keep + h;
    const double up = nn::sample_loss(spec, params, input, label, weight);
    slot = keep - h;
    const double down = nn::sample_loss(spec, params, input, label, weight);
    slot = keep;
    return (up - down) / (2 * h);
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < params[i].weights.size(); ++k) g[i].weights[k] = probe(params[i].weights[k]);
    for (std::size_t k = 0; k < params[i].bias.size(); ++k) g[i].bias[k] = probe(params[i].bias[k]);
  }
  return g;
}

}  // namespace testing_support
