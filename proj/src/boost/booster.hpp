#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nn/learner.hpp"
#include "prune/pruner.hpp"

namespace edgeboost::boost {

inline constexpr double kProbabilityFloor = 1e-6;

struct SampleWeights {
  std::vector<double> weights;
  int generation = 0;
};

struct PoolConfig {
  int pool_size = 6;      // M
  int ensemble_size = 4;  // N
  double alpha = 0.5;
  prune::PruneSchedule prune;  // target fraction is forced to 1/N by build_pool
  nn::TrainOptions train;      // initial training
  std::uint64_t seed = 1;
};

/// Full contract used by the CLI: M > N, 2 <= N <= 5, alpha > 0.
void validate(const PoolConfig& cfg);

SampleWeights init_weights(std::size_t train_size);

/// Reweighting factor p_true^(-alpha) with p_true floored at kProbabilityFloor.
double weight_multiplier(double p_true, double alpha);

/// Pre-normalisation weights w_i * multiplier(f(x_i)[y_i]).
std::vector<double> raw_updated_weights(const SampleWeights& w, const nn::WeakLearner& learner,
                                        const nn::Dataset& data, double alpha);

void normalize_mean(std::vector<double>& w);

SampleWeights update_weights(const SampleWeights& w, const nn::WeakLearner& learner,
                             const nn::Dataset& data, double alpha);

struct PoolResult {
  std::vector<nn::WeakLearner> learners;
  SampleWeights final_weights;
  std::uint64_t baseline_macs = 0;
  std::uint64_t baseline_parameters = 0;
};

/// One fresh, trained and pruned learner; learner m uses seed cfg.seed + m.
nn::WeakLearner build_learner(const nn::NetworkSpec& base, const nn::Dataset& data,
                              const SampleWeights& weights, const PoolConfig& cfg, int index);

PoolResult build_pool(const nn::NetworkSpec& base, const nn::Dataset& data, const PoolConfig& cfg);

}  // namespace edgeboost::boost
