#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nn/dataset.hpp"
#include "nn/network_spec.hpp"

namespace edgeboost::nn {

struct LayerParams {
  std::vector<double> weights;  // conv: [filter][in_channel][ky][kx]; fc: [output][input]
  std::vector<double> bias;
  bool operator==(const LayerParams&) const = default;
};

using Parameters = std::vector<LayerParams>;

struct WeakLearner {
  NetworkSpec spec;
  Parameters params;
  std::uint64_t macs = 0;
  double eval_accuracy = 0.0;
  std::uint32_t id = 0;
  int generation = 0;  // sample-weight generation the learner was trained under
};

/// He-normal weights, zero biases.
Parameters init_parameters(const NetworkSpec& spec, std::uint64_t seed);
Parameters zero_parameters(const NetworkSpec& spec);
WeakLearner make_learner(const NetworkSpec& spec, std::uint64_t seed, std::uint32_t id = 0);

/// Throws invalid_input when parameter shapes or the MAC field disagree with the network spec.
void check_consistent(const WeakLearner& learner);

std::vector<double> forward(const NetworkSpec& spec, const Parameters& params,
                            std::span<const double> input);
std::vector<double> forward(const WeakLearner& learner, std::span<const double> input);

int argmax(std::span<const double> v);
double accuracy(const WeakLearner& learner, std::span<const Sample> samples);

/// Weighted cross-entropy of one sample: weight * -log p[label].
double sample_loss(const NetworkSpec& spec, const Parameters& params, std::span<const double> input,
                   int label, double weight = 1.0);

/// Backprop gradient of sample_loss with respect to every parameter.
Parameters sample_gradient(const NetworkSpec& spec, const Parameters& params,
                           std::span<const double> input, int label, double weight = 1.0);

struct TrainOptions {
  int epochs = 10;
  double learning_rate = 0.05;
  int batch_size = 16;
  std::uint64_t seed = 0;
};

struct TrainResult {
  WeakLearner learner;
  std::vector<double> loss_history;  // mean weighted loss per epoch
};

/// Mini-batch SGD on the train split. An empty `sample_weights` span means
/// unit weights. Refreshes eval_accuracy on the eval split.
TrainResult train(WeakLearner learner, const Dataset& data, std::span<const double> sample_weights,
                  const TrainOptions& opt);

struct FcUpdate {
  WeakLearner learner;
  std::vector<std::vector<double>> outputs;  // forward outputs on the pre-update parameters
};

/// One SGD step on the fully-connected layers only; the forward pass used for
/// the gradient is returned as the batch's inference outputs.
FcUpdate train_fc_only(WeakLearner learner, std::span<const Sample> batch,
                       std::span<const double> sample_weights, double learning_rate);

/// FNV-1a over the raw bytes of every conv layer's weights and biases.
std::uint64_t conv_checksum(const WeakLearner& learner);

struct GradientCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

GradientCheckResult gradient_check(const NetworkSpec& spec, const Parameters& params,
                                   std::span<const double> input, int label, double weight = 1.0,
                                   double step = 1e-5);
/// Random parameters, input, label and weight drawn from `seed`.
GradientCheckResult gradient_check(const NetworkSpec& spec, std::uint64_t seed);

}  // namespace edgeboost::nn
