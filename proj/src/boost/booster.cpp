#include "boost/booster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace edgeboost::boost {

void validate(const PoolConfig& cfg) {
  require(cfg.ensemble_size >= 2 && cfg.ensemble_size <= 5, ErrorCode::invalid_config,
          "ensemble size N must be in [2, 5]");
  require(cfg.pool_size > cfg.ensemble_size, ErrorCode::invalid_config,
          "pool size M must exceed ensemble size N (M=" + std::to_string(cfg.pool_size) +
              ", N=" + std::to_string(cfg.ensemble_size) + ")");
  require(cfg.alpha > 0.0 && std::isfinite(cfg.alpha), ErrorCode::invalid_config, "alpha must be > 0");
  require(cfg.train.epochs >= 0 && cfg.train.batch_size >= 1 && cfg.train.learning_rate > 0.0,
          ErrorCode::invalid_config, "invalid training hyperparameters");
  prune::PruneSchedule s = cfg.prune;
  s.target_mac_fraction = 1.0 / cfg.ensemble_size;
  prune::validate(s);
}

SampleWeights init_weights(std::size_t train_size) {
  require(train_size >= 1, ErrorCode::invalid_input, "train split is empty");
  return {std::vector<double>(train_size, 1.0), 0};
}

double weight_multiplier(double p_true, double alpha) {
  return std::exp(-alpha * std::log(std::max(p_true, kProbabilityFloor)));
}

std::vector<double> raw_updated_weights(const SampleWeights& w, const nn::WeakLearner& learner,
                                        const nn::Dataset& data, double alpha) {
  require(w.weights.size() == data.train.size(), ErrorCode::invalid_input,
          "sample weight count != train split size");
  std::vector<double> out(w.weights.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto probs = nn::forward(learner, data.train[i].input);
    out[i] = w.weights[i] * weight_multiplier(probs[static_cast<std::size_t>(data.train[i].label)], alpha);
  }
  return out;
}

void normalize_mean(std::vector<double>& w) {
  if (w.empty()) return;
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  require(mean > 0.0 && std::isfinite(mean), ErrorCode::invalid_input, "cannot normalise sample weights");
  for (auto& v : w) v /= mean;
}

SampleWeights update_weights(const SampleWeights& w, const nn::WeakLearner& learner,
                             const nn::Dataset& data, double alpha) {
  require(alpha >= 0.0, ErrorCode::invalid_input, "alpha must be >= 0");
  SampleWeights out{raw_updated_weights(w, learner, data, alpha), w.generation + 1};
  normalize_mean(out.weights);
  return out;
}

nn::WeakLearner build_learner(const nn::NetworkSpec& base, const nn::Dataset& data,
                              const SampleWeights& weights, const PoolConfig& cfg, int index) {
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(index);
  nn::WeakLearner l = nn::make_learner(base, seed, static_cast<std::uint32_t>(index));
  nn::TrainOptions opt = cfg.train;
  opt.seed = seed;
  try {
    l = nn::train(std::move(l), data, weights.weights, opt).learner;
    prune::PruneSchedule s = cfg.prune;
    s.target_mac_fraction = 1.0 / cfg.ensemble_size;
    l = prune::prune_to_budget(std::move(l), data, weights.weights, s, opt);
  } catch (const Error& e) {
    throw Error(e.code(), "learner " + std::to_string(index) + ": " + e.what());
  }
  l.generation = weights.generation;
  return l;
}

PoolResult build_pool(const nn::NetworkSpec& base, const nn::Dataset& data, const PoolConfig& cfg) {
  require(cfg.pool_size >= 1 && cfg.ensemble_size >= 1, ErrorCode::invalid_config,
          "pool and ensemble sizes must be >= 1");
  nn::validate(base);
  nn::validate(data);
  PoolResult res;
  res.baseline_macs = nn::count_macs(base);
  res.baseline_parameters = nn::count_parameters(base);
  SampleWeights w = init_weights(data.train.size());
  for (int m = 0; m < cfg.pool_size; ++m) {
    res.learners.push_back(build_learner(base, data, w, cfg, m));
    w = update_weights(w, res.learners.back(), data, cfg.alpha);
  }
  res.final_weights = std::move(w);
  return res;
}

}  // namespace edgeboost::boost
