#include "ensemble/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace edgeboost::ensemble {

double learner_weight(double error_rate) {
  const double e = std::clamp(error_rate, kErrorClamp, 1.0 - kErrorClamp);
  return 0.5 * std::log((1.0 - e) / e);
}

Vote weighted_vote(std::span<const std::vector<double>> probabilities, std::span<const double> weights) {
  require(!probabilities.empty() && probabilities.size() == weights.size(), ErrorCode::invalid_input,
          "vote needs one weight per probability vector");
  Vote v;
  v.scores.assign(probabilities.front().size(), 0.0);
  v.degenerate = true;
  for (std::size_t m = 0; m < probabilities.size(); ++m) {
    require(probabilities[m].size() == v.scores.size(), ErrorCode::invalid_input,
            "probability vectors differ in length");
    if (weights[m] > 0.0) v.degenerate = false;
    for (std::size_t c = 0; c < v.scores.size(); ++c) v.scores[c] += weights[m] * probabilities[m][c];
  }
  v.label = nn::argmax(v.scores);
  return v;
}

PredictionTable predict_all(std::span<const nn::WeakLearner> pool, std::span<const nn::Sample> samples) {
  PredictionTable t;
  for (const auto& s : samples) t.labels.push_back(s.label);
  for (const auto& l : pool) {
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    std::size_t correct = 0;
    for (const auto& s : samples) {
      rows.push_back(nn::forward(l, s.input));
      if (nn::argmax(rows.back()) == s.label) ++correct;
    }
    const double acc = samples.empty() ? 0.0 : static_cast<double>(correct) / samples.size();
    t.individual_accuracy.push_back(acc);
    t.vote_weights.push_back(learner_weight(1.0 - acc));
    t.probs.push_back(std::move(rows));
  }
  return t;
}

double subset_accuracy(const PredictionTable& t, std::span<const std::size_t> subset) {
  if (t.labels.empty() || subset.empty()) return 0.0;
  const std::size_t classes = t.probs[subset.front()].front().size();
  std::vector<double> scores(classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < t.labels.size(); ++i) {
    std::fill(scores.begin(), scores.end(), 0.0);
    for (std::size_t m : subset) {
      const auto& p = t.probs[m][i];
      for (std::size_t c = 0; c < classes; ++c) scores[c] += t.vote_weights[m] * p[c];
    }
    if (nn::argmax(scores) == t.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(t.labels.size());
}

std::vector<std::size_t> greedy_select(const PredictionTable& t, std::size_t n) {
  const std::size_t m = t.probs.size();
  require(n >= 1 && n <= m, ErrorCode::invalid_config,
          "cannot select " + std::to_string(n) + " of " + std::to_string(m) + " learners");
  std::vector<std::size_t> chosen;
  std::vector<bool> used(m, false);
  while (chosen.size() < n) {
    double best = -1.0;
    std::size_t pick = m;
    for (std::size_t c = 0; c < m; ++c) {
      if (used[c]) continue;
      chosen.push_back(c);
      const double acc = subset_accuracy(t, chosen);
      chosen.pop_back();
      if (acc > best) {
        best = acc;
        pick = c;
      }
    }
    used[pick] = true;
    chosen.push_back(pick);
  }
  return chosen;
}

std::vector<std::size_t> backfit_indices(const PredictionTable& t, std::size_t n) {
  const std::size_t m = t.probs.size();
  std::vector<std::size_t> chosen = greedy_select(t, n);
  double current = subset_accuracy(t, chosen);
  const std::size_t max_passes = m * n;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (std::size_t slot = 0; slot < chosen.size(); ++slot) {
      std::size_t best_cand = m;
      double best_acc = current;
      const std::size_t original = chosen[slot];
      for (std::size_t c = 0; c < m; ++c) {
        if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
        chosen[slot] = c;
        const double acc = subset_accuracy(t, chosen);
        if (acc > best_acc) {
          best_acc = acc;
          best_cand = c;
        }
      }
      chosen[slot] = best_cand < m ? best_cand : original;
      if (best_cand < m) {
        current = best_acc;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return chosen;
}

void profile_accuracy(EnsembleModel& model, std::span<const nn::Sample> eval) {
  const std::size_t n = model.size();
  model.chance_level = model.class_count > 0 ? 1.0 / model.class_count : 0.0;
  model.acc_profile.assign(n, 0.0);
  model.delta_acc.assign(n, 0.0);
  if (n == 0) return;
  const PredictionTable t = predict_all(model.learners, eval);
  PredictionTable weighted = t;
  weighted.vote_weights = model.vote_weights;
  std::vector<std::size_t> prefix;
  double prev = model.chance_level;
  for (std::size_t k = 0; k < n; ++k) {
    prefix.push_back(k);
    model.acc_profile[k] = subset_accuracy(weighted, prefix);
    model.delta_acc[k] = model.acc_profile[k] - prev;
    prev = model.acc_profile[k];
  }
}

EnsembleModel make_ensemble(std::span<const nn::WeakLearner> pool, std::span<const std::size_t> subset,
                            std::span<const nn::Sample> eval) {
  require(!subset.empty(), ErrorCode::invalid_input, "empty ensemble subset");
  const PredictionTable t = predict_all(pool, eval);
  std::vector<std::size_t> order(subset.begin(), subset.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (t.individual_accuracy[a] != t.individual_accuracy[b])
      return t.individual_accuracy[a] > t.individual_accuracy[b];
    return a < b;
  });
  EnsembleModel model;
  model.class_count = pool[order.front()].spec.class_count;
  for (std::size_t idx : order) {
    model.learners.push_back(pool[idx]);
    model.learners.back().eval_accuracy = t.individual_accuracy[idx];
    model.vote_weights.push_back(t.vote_weights[idx]);
    model.pool_indices.push_back(idx);
  }
  profile_accuracy(model, eval);
  return model;
}

EnsembleModel backfit_select(std::span<const nn::WeakLearner> pool, std::size_t n,
                             std::span<const nn::Sample> eval) {
  require(n >= 1, ErrorCode::invalid_config, "ensemble size must be >= 1");
  require(pool.size() >= n, ErrorCode::invalid_config,
          "pool of " + std::to_string(pool.size()) + " cannot supply " + std::to_string(n) + " learners");
  const PredictionTable t = predict_all(pool, eval);
  const auto subset = backfit_indices(t, n);
  return make_ensemble(pool, subset, eval);
}

Vote predict(const EnsembleModel& model, std::span<const double> input, std::size_t k) {
  require(k >= 1 && k <= model.size(), ErrorCode::invalid_input, "prefix size out of range");
  std::vector<std::vector<double>> probs;
  for (std::size_t i = 0; i < k; ++i) probs.push_back(nn::forward(model.learners[i], input));
  return weighted_vote(probs, std::span<const double>(model.vote_weights.data(), k));
}

double ensemble_accuracy(const EnsembleModel& model, std::span<const nn::Sample> samples, std::size_t k) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples)
    if (predict(model, s.input, k).label == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace edgeboost::ensemble
