#pragma once

#include <span>
#include <vector>

#include "nn/learner.hpp"

namespace edgeboost::ensemble {

inline constexpr double kErrorClamp = 1e-4;

struct EnsembleModel {
  std::vector<nn::WeakLearner> learners;  // descending eval accuracy
  std::vector<double> vote_weights;       // a_m, aligned with learners
  std::vector<std::size_t> pool_indices;  // position of each learner in the source pool
  std::vector<double> acc_profile;        // acc(k), k = 1..N
  std::vector<double> delta_acc;          // acc(k) - acc(k-1), acc(0) = chance
  double chance_level = 0.0;
  int class_count = 0;

  std::size_t size() const { return learners.size(); }
};

/// a = 0.5 ln((1-e)/e), e clamped to [kErrorClamp, 1-kErrorClamp].
double learner_weight(double error_rate);

struct Vote {
  int label = 0;
  std::vector<double> scores;
  bool degenerate = false;  // every weight <= 0
};

Vote weighted_vote(std::span<const std::vector<double>> probabilities, std::span<const double> weights);

/// Cached per-learner probabilities on a fixed sample set.
struct PredictionTable {
  std::vector<std::vector<std::vector<double>>> probs;  // [learner][sample][class]
  std::vector<int> labels;
  std::vector<double> individual_accuracy;
  std::vector<double> vote_weights;
};

PredictionTable predict_all(std::span<const nn::WeakLearner> pool, std::span<const nn::Sample> samples);

double subset_accuracy(const PredictionTable& table, std::span<const std::size_t> subset);

/// Forward-greedy inclusion; ties go to the lowest pool index.
std::vector<std::size_t> greedy_select(const PredictionTable& table, std::size_t n);

/// Greedy inclusion followed by strictly improving single swaps, at most M*N passes.
std::vector<std::size_t> backfit_indices(const PredictionTable& table, std::size_t n);

/// Selects N learners, orders them by descending eval accuracy and profiles them.
EnsembleModel backfit_select(std::span<const nn::WeakLearner> pool, std::size_t n,
                             std::span<const nn::Sample> eval);

EnsembleModel make_ensemble(std::span<const nn::WeakLearner> pool, std::span<const std::size_t> subset,
                            std::span<const nn::Sample> eval);

void profile_accuracy(EnsembleModel& model, std::span<const nn::Sample> eval);

/// Weighted-vote prediction over the first k learners.
Vote predict(const EnsembleModel& model, std::span<const double> input, std::size_t k);

double ensemble_accuracy(const EnsembleModel& model, std::span<const nn::Sample> samples, std::size_t k);

}  // namespace edgeboost::ensemble
