#include "prune/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "common/error.hpp"

namespace edgeboost::prune {

using nn::LayerKind;

void validate(const PruneSchedule& s) {
  require(s.target_mac_fraction > 0.0 && s.target_mac_fraction <= 1.0, ErrorCode::invalid_config,
          "target_mac_fraction must be in (0, 1]");
  require(s.filters_removed_per_step >= 1, ErrorCode::invalid_config,
          "filters_removed_per_step must be >= 1");
  require(s.retrain_epochs_per_step >= 0, ErrorCode::invalid_config,
          "retrain_epochs_per_step must be >= 0");
}

namespace {

// Next layer after `layer` that owns parameters, skipping pools.
std::size_t consumer_of(const nn::NetworkSpec& spec, std::size_t layer) {
  for (std::size_t j = layer + 1; j < spec.layers.size(); ++j) {
    if (spec.layers[j].has_parameters()) return j;
    if (spec.layers[j].kind == LayerKind::softmax) break;
  }
  return spec.layers.size();
}

}  // namespace

std::vector<std::size_t> prunable_layers(const nn::NetworkSpec& spec) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < spec.layers.size(); ++i)
    if (spec.layers[i].kind == LayerKind::conv && consumer_of(spec, i) < spec.layers.size())
      out.push_back(i);
  return out;
}

std::vector<LayerRanking> rank_filters(const nn::WeakLearner& learner) {
  std::vector<LayerRanking> out;
  const auto& spec = learner.spec;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind != LayerKind::conv) continue;
    LayerRanking r{i, {}};
    const int filters = spec.layers[i].filters;
    const auto& w = learner.params[i].weights;
    const std::size_t per = w.size() / static_cast<std::size_t>(filters);
    for (int f = 0; f < filters; ++f) {
      double ss = 0.0;
      for (std::size_t k = 0; k < per; ++k) ss += w[f * per + k] * w[f * per + k];
      r.filters.push_back({f, std::sqrt(ss)});
    }
    std::stable_sort(r.filters.begin(), r.filters.end(),
                     [](const FilterNorm& a, const FilterNorm& b) { return a.norm < b.norm; });
    out.push_back(std::move(r));
  }
  require(!out.empty(), ErrorCode::invalid_input, "learner has no conv layer to rank");
  return out;
}

nn::WeakLearner prune_step(const nn::WeakLearner& learner, const Victims& victims) {
  nn::WeakLearner out = learner;
  // Process layers front to back on the original indices; each removal only
  // touches the layer itself and its consumer.
  for (const auto& [layer, list] : victims) {
    if (list.empty()) continue;
    require(layer < out.spec.layers.size() && out.spec.layers[layer].kind == LayerKind::conv,
            ErrorCode::invalid_input, "victim layer " + std::to_string(layer) + " is not a conv layer");
    const std::size_t consumer = consumer_of(out.spec, layer);
    require(consumer < out.spec.layers.size(), ErrorCode::invalid_input,
            "layer " + std::to_string(layer) + " feeds the output and cannot be pruned");
    const std::set<int> drop(list.begin(), list.end());
    const int filters = out.spec.layers[layer].filters;
    for (int f : drop)
      require(f >= 0 && f < filters, ErrorCode::invalid_input, "victim filter index out of range");
    if (static_cast<int>(drop.size()) >= filters)
      fail(ErrorCode::budget_infeasible,
           "pruning would empty conv layer " + std::to_string(layer));

    const nn::TensorShape consumer_in = nn::layer_input_shape(out.spec, consumer);
    const std::size_t plane = static_cast<std::size_t>(consumer_in.height) * consumer_in.width;

    // own filters
    auto& p = out.params[layer];
    const std::size_t per = p.weights.size() / static_cast<std::size_t>(filters);
    nn::LayerParams kept;
    for (int f = 0; f < filters; ++f) {
      if (drop.count(f)) continue;
      kept.weights.insert(kept.weights.end(), p.weights.begin() + static_cast<std::ptrdiff_t>(f * per),
                          p.weights.begin() + static_cast<std::ptrdiff_t>((f + 1) * per));
      kept.bias.push_back(p.bias[static_cast<std::size_t>(f)]);
    }
    p = std::move(kept);

    // consumer input slices
    auto& cp = out.params[consumer];
    const auto& cl = out.spec.layers[consumer];
    nn::LayerParams ckept;
    ckept.bias = cp.bias;
    if (cl.kind == LayerKind::conv) {
      const std::size_t kk = static_cast<std::size_t>(cl.kernel) * cl.kernel;
      for (int o = 0; o < cl.filters; ++o)
        for (int c = 0; c < filters; ++c) {
          if (drop.count(c)) continue;
          const std::size_t off = (static_cast<std::size_t>(o) * filters + c) * kk;
          ckept.weights.insert(ckept.weights.end(), cp.weights.begin() + static_cast<std::ptrdiff_t>(off),
                               cp.weights.begin() + static_cast<std::ptrdiff_t>(off + kk));
        }
    } else {
      const std::size_t n_in = consumer_in.size();
      for (int o = 0; o < cl.outputs; ++o)
        for (int c = 0; c < filters; ++c) {
          if (drop.count(c)) continue;
          const std::size_t off = static_cast<std::size_t>(o) * n_in + c * plane;
          ckept.weights.insert(ckept.weights.end(), cp.weights.begin() + static_cast<std::ptrdiff_t>(off),
                               cp.weights.begin() + static_cast<std::ptrdiff_t>(off + plane));
        }
    }
    cp = std::move(ckept);
    out.spec.layers[layer].filters = filters - static_cast<int>(drop.size());
  }
  out.macs = nn::count_macs(out.spec);
  nn::check_consistent(out);
  return out;
}

std::uint64_t single_filter_macs(const nn::NetworkSpec& spec, std::size_t layer) {
  nn::NetworkSpec smaller = spec;
  require(smaller.layers.at(layer).kind == LayerKind::conv && smaller.layers[layer].filters > 1,
          ErrorCode::invalid_input, "layer has no removable filter");
  smaller.layers[layer].filters -= 1;
  return nn::count_macs(spec) - nn::count_macs(smaller);
}

std::uint64_t max_single_filter_macs(const nn::NetworkSpec& spec) {
  std::uint64_t best = 0;
  for (std::size_t i : prunable_layers(spec))
    if (spec.layers[i].filters > 1) best = std::max(best, single_filter_macs(spec, i));
  return best;
}

std::uint64_t mac_budget(std::uint64_t baseline_macs, double target_fraction) {
  // Rounded down so that N learners at 1/N each never exceed the baseline together.
  if (target_fraction >= 1.0) return baseline_macs;
  return static_cast<std::uint64_t>(std::floor(target_fraction * static_cast<double>(baseline_macs) + 1e-9));
}

Victims select_victims(const nn::WeakLearner& learner, int count) {
  struct Candidate {
    double norm;
    std::size_t layer;
    int filter;
  };
  std::vector<Candidate> all;
  const auto prunable = prunable_layers(learner.spec);
  for (const auto& r : rank_filters(learner)) {
    if (std::find(prunable.begin(), prunable.end(), r.layer) == prunable.end()) continue;
    // Compare layers on norm relative to the layer mean: upstream pruning
    // shrinks fan-in and with it every raw norm of this layer.
    double mean = 0.0;
    for (const auto& f : r.filters) mean += f.norm;
    mean /= static_cast<double>(r.filters.size());
    const double scale = mean > 0.0 ? 1.0 / mean : 1.0;
    for (const auto& f : r.filters) all.push_back({f.norm * scale, r.layer, f.filter});
  }
  std::stable_sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    if (a.layer != b.layer) return a.layer < b.layer;
    return a.filter < b.filter;
  });
  Victims v;
  std::map<std::size_t, int> remaining;
  for (std::size_t i : prunable) remaining[i] = learner.spec.layers[i].filters;
  int taken = 0;
  for (const auto& c : all) {
    if (taken == count) break;
    if (remaining[c.layer] <= 1) continue;
    v[c.layer].push_back(c.filter);
    --remaining[c.layer];
    ++taken;
  }
  return v;
}

nn::WeakLearner prune_to_budget(nn::WeakLearner learner, const nn::Dataset& data,
                                std::span<const double> sample_weights, const PruneSchedule& schedule,
                                const nn::TrainOptions& retrain) {
  validate(schedule);
  nn::check_consistent(learner);
  if (schedule.target_mac_fraction >= 1.0) return learner;

  const std::uint64_t target = mac_budget(learner.macs, schedule.target_mac_fraction);
  // Feasibility: every prunable layer at one filter.
  nn::NetworkSpec floor_spec = learner.spec;
  for (std::size_t i : prunable_layers(floor_spec)) floor_spec.layers[i].filters = 1;
  const std::uint64_t floor_macs = nn::count_macs(floor_spec);
  if (floor_macs > target) {
    const auto layer_macs = nn::count_layer_macs(floor_spec);
    const auto worst = static_cast<std::size_t>(
        std::max_element(layer_macs.begin(), layer_macs.end()) - layer_macs.begin());
    fail(ErrorCode::budget_infeasible,
         "MAC budget " + std::to_string(target) + " unreachable: minimum is " + std::to_string(floor_macs) +
             ", blocked by layer " + std::to_string(worst) + " (" + std::to_string(layer_macs[worst]) +
             " MACs at one filter per layer)");
  }

  int step = 0;
  while (learner.macs > target) {
    const Victims v = select_victims(learner, schedule.filters_removed_per_step);
    if (v.empty()) fail(ErrorCode::budget_infeasible, "no removable filters left before reaching budget");
    const double acc = learner.eval_accuracy;
    learner = prune_step(learner, v);
    learner.eval_accuracy = acc;
    if (schedule.retrain_epochs_per_step > 0) {
      nn::TrainOptions opt = retrain;
      opt.epochs = schedule.retrain_epochs_per_step;
      opt.seed = retrain.seed + 1000003ull * static_cast<std::uint64_t>(++step);
      learner = nn::train(std::move(learner), data, sample_weights, opt).learner;
    }
  }
  if (!data.eval.empty()) learner.eval_accuracy = nn::accuracy(learner, data.eval);
  return learner;
}

}  // namespace edgeboost::prune
