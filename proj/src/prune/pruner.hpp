#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "nn/learner.hpp"

namespace edgeboost::prune {

struct PruneSchedule {
  double target_mac_fraction = 1.0;  // 1/N
  int filters_removed_per_step = 1;
  int retrain_epochs_per_step = 2;
};

void validate(const PruneSchedule& s);

struct FilterNorm {
  int filter = 0;
  double norm = 0.0;
};

struct LayerRanking {
  std::size_t layer = 0;
  std::vector<FilterNorm> filters;  // ascending norm, ties by filter index
};

/// L2 norm of every conv filter's weights, one entry per conv layer.
std::vector<LayerRanking> rank_filters(const nn::WeakLearner& learner);

/// layer index -> filter indices to drop
using Victims = std::map<std::size_t, std::vector<int>>;

/// Removes filters and the matching input-channel slices of the next
/// parameterised layer; surviving weights are copied unchanged.
nn::WeakLearner prune_step(const nn::WeakLearner& learner, const Victims& victims);

/// Conv layers whose filter count can change (those feeding another
/// parameterised layer).
std::vector<std::size_t> prunable_layers(const nn::NetworkSpec& spec);

/// MACs removed from `spec` by dropping a single filter of `layer`.
std::uint64_t single_filter_macs(const nn::NetworkSpec& spec, std::size_t layer);
std::uint64_t max_single_filter_macs(const nn::NetworkSpec& spec);

std::uint64_t mac_budget(std::uint64_t baseline_macs, double target_fraction);

/// Globally lowest-norm filters, at most `count`, never emptying a layer.
Victims select_victims(const nn::WeakLearner& learner, int count);

/// Iterative prune + retrain until count_macs <= mac_budget(original, fraction).
nn::WeakLearner prune_to_budget(nn::WeakLearner learner, const nn::Dataset& data,
                                std::span<const double> sample_weights, const PruneSchedule& schedule,
                                const nn::TrainOptions& retrain);

}  // namespace edgeboost::prune
