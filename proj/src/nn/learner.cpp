#include "nn/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "common/error.hpp"

namespace edgeboost::nn {

namespace {

// Forward/backward over one spec with reusable activation buffers.
class Engine {
 public:
  explicit Engine(const NetworkSpec& spec) : spec_(spec), shapes_(propagate_shapes(spec)) {
    validate(spec);
    acts_.resize(spec.layers.size() + 1);
    acts_[0].resize(spec.input.size());
    for (std::size_t i = 0; i < shapes_.size(); ++i) acts_[i + 1].resize(shapes_[i].size());
    cols_.resize(spec.layers.size());
    grads_.resize(spec.layers.size() + 1);
    for (std::size_t i = 0; i < acts_.size(); ++i) grads_[i].resize(acts_[i].size());
  }

  const TensorShape& in_shape(std::size_t i) const { return i == 0 ? spec_.input : shapes_[i - 1]; }
  const std::vector<double>& output() const { return acts_.back(); }

  const std::vector<double>& run(const Parameters& params, std::span<const double> input) {
    require(input.size() == spec_.input.size(), ErrorCode::invalid_input,
            "input has " + std::to_string(input.size()) + " values, spec expects " +
                std::to_string(spec_.input.size()));
    std::copy(input.begin(), input.end(), acts_[0].begin());
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      const LayerSpec& l = spec_.layers[i];
      const auto& in = acts_[i];
      auto& out = acts_[i + 1];
      switch (l.kind) {
        case LayerKind::conv: conv_forward(l, in_shape(i), shapes_[i], params[i], in, cols_[i], out); break;
        case LayerKind::avg_pool: pool_forward(l, in_shape(i), shapes_[i], in, out); break;
        case LayerKind::fully_connected: fc_forward(params[i], in, out); break;
        case LayerKind::softmax: softmax(in, out); break;
      }
      if (l.activation == Activation::relu)
        for (auto& v : out) v = v > 0.0 ? v : 0.0;
    }
    return acts_.back();
  }

  // Accumulates `scale * dL/dparam` into grads for layers [stop, end). Requires
  // a preceding run(); `label`/`weight` describe the weighted cross-entropy.
  void backward(const Parameters& params, int label, double scale, Parameters& grads,
                std::size_t stop = 0) {
    const std::size_t last = spec_.layers.size() - 1;  // softmax
    auto& g_logits = grads_[last];
    const auto& p = acts_.back();
    for (std::size_t k = 0; k < p.size(); ++k)
      g_logits[k] = scale * (p[k] - (static_cast<int>(k) == label ? 1.0 : 0.0));
    for (std::size_t ii = last; ii-- > stop;) {
      const LayerSpec& l = spec_.layers[ii];
      auto& g_out = grads_[ii + 1];
      if (l.activation == Activation::relu) {
        const auto& out = acts_[ii + 1];
        for (std::size_t k = 0; k < g_out.size(); ++k)
          if (out[k] <= 0.0) g_out[k] = 0.0;
      }
      const bool need_input_grad = ii > stop;
      auto& g_in = grads_[ii];
      if (need_input_grad) std::fill(g_in.begin(), g_in.end(), 0.0);
      switch (l.kind) {
        case LayerKind::conv:
          conv_backward(l, in_shape(ii), shapes_[ii], params[ii], cols_[ii], g_out, grads[ii],
                        need_input_grad ? &g_in : nullptr, g_cols_);
          break;
        case LayerKind::avg_pool:
          if (need_input_grad) pool_backward(l, in_shape(ii), shapes_[ii], g_out, g_in);
          break;
        case LayerKind::fully_connected:
          fc_backward(params[ii], acts_[ii], g_out, grads[ii], need_input_grad ? &g_in : nullptr);
          break;
        case LayerKind::softmax: break;
      }
    }
  }

 private:
  // Patch matrix [out position][in_channel * k * k], zero where padding.
  static void im2col(const LayerSpec& l, const TensorShape& is, const TensorShape& os,
                     const std::vector<double>& in, std::vector<double>& cols) {
    const int k = l.kernel, s = l.stride, pad = l.padding;
    const std::size_t patch = static_cast<std::size_t>(is.channels) * k * k;
    cols.assign(patch * os.height * os.width, 0.0);
    for (int oy = 0; oy < os.height; ++oy)
      for (int ox = 0; ox < os.width; ++ox) {
        double* col = cols.data() + (static_cast<std::size_t>(oy) * os.width + ox) * patch;
        for (int c = 0; c < is.channels; ++c)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s + ky - pad;
            if (iy < 0 || iy >= is.height) continue;
            const double* row = in.data() + (static_cast<std::size_t>(c) * is.height + iy) * is.width;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s + kx - pad;
              if (ix >= 0 && ix < is.width) col[(c * k + ky) * k + kx] = row[ix];
            }
          }
      }
  }

  static void conv_forward(const LayerSpec& l, const TensorShape& is, const TensorShape& os,
                           const LayerParams& p, const std::vector<double>& in, std::vector<double>& cols,
                           std::vector<double>& out) {
    im2col(l, is, os, in, cols);
    const std::size_t patch = static_cast<std::size_t>(is.channels) * l.kernel * l.kernel;
    const std::size_t positions = static_cast<std::size_t>(os.height) * os.width;
    for (int f = 0; f < os.channels; ++f) {
      const double* w = p.weights.data() + f * patch;
      double* o = out.data() + f * positions;
      for (std::size_t q = 0; q < positions; ++q) {
        const double* col = cols.data() + q * patch;
        double acc = 0.0;
        for (std::size_t j = 0; j < patch; ++j) acc += w[j] * col[j];
        o[q] = p.bias[static_cast<std::size_t>(f)] + acc;
      }
    }
  }

  static void conv_backward(const LayerSpec& l, const TensorShape& is, const TensorShape& os,
                            const LayerParams& p, const std::vector<double>& cols,
                            const std::vector<double>& g_out, LayerParams& g, std::vector<double>* g_in,
                            std::vector<double>& g_cols) {
    const int k = l.kernel, s = l.stride, pad = l.padding;
    const std::size_t patch = static_cast<std::size_t>(is.channels) * k * k;
    const std::size_t positions = static_cast<std::size_t>(os.height) * os.width;
    if (g_in) g_cols.assign(patch * positions, 0.0);
    for (int f = 0; f < os.channels; ++f) {
      const double* go = g_out.data() + f * positions;
      const double* w = p.weights.data() + f * patch;
      double* gw = g.weights.data() + f * patch;
      double bsum = 0.0;
      for (std::size_t q = 0; q < positions; ++q) {
        const double gq = go[q];
        if (gq == 0.0) continue;
        bsum += gq;
        const double* col = cols.data() + q * patch;
        for (std::size_t j = 0; j < patch; ++j) gw[j] += gq * col[j];
        if (g_in) {
          double* gc = g_cols.data() + q * patch;
          for (std::size_t j = 0; j < patch; ++j) gc[j] += gq * w[j];
        }
      }
      g.bias[static_cast<std::size_t>(f)] += bsum;
    }
    if (!g_in) return;
    for (int oy = 0; oy < os.height; ++oy)
      for (int ox = 0; ox < os.width; ++ox) {
        const double* gc = g_cols.data() + (static_cast<std::size_t>(oy) * os.width + ox) * patch;
        for (int c = 0; c < is.channels; ++c)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s + ky - pad;
            if (iy < 0 || iy >= is.height) continue;
            double* row = g_in->data() + (static_cast<std::size_t>(c) * is.height + iy) * is.width;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s + kx - pad;
              if (ix >= 0 && ix < is.width) row[ix] += gc[(c * k + ky) * k + kx];
            }
          }
      }
  }

  static void pool_forward(const LayerSpec& l, const TensorShape& is, const TensorShape& os,
                           const std::vector<double>& in, std::vector<double>& out) {
    const int w = l.window;
    const double inv = 1.0 / (w * w);
    for (int c = 0; c < os.channels; ++c)
      for (int oy = 0; oy < os.height; ++oy)
        for (int ox = 0; ox < os.width; ++ox) {
          double acc = 0.0;
          for (int dy = 0; dy < w; ++dy)
            for (int dx = 0; dx < w; ++dx)
              acc += in[(static_cast<std::size_t>(c) * is.height + oy * w + dy) * is.width + ox * w + dx];
          out[(static_cast<std::size_t>(c) * os.height + oy) * os.width + ox] = acc * inv;
        }
  }

  static void pool_backward(const LayerSpec& l, const TensorShape& is, const TensorShape& os,
                            const std::vector<double>& g_out, std::vector<double>& g_in) {
    const int w = l.window;
    const double inv = 1.0 / (w * w);
    for (int c = 0; c < os.channels; ++c)
      for (int oy = 0; oy < os.height; ++oy)
        for (int ox = 0; ox < os.width; ++ox) {
          const double g = g_out[(static_cast<std::size_t>(c) * os.height + oy) * os.width + ox] * inv;
          for (int dy = 0; dy < w; ++dy)
            for (int dx = 0; dx < w; ++dx)
              g_in[(static_cast<std::size_t>(c) * is.height + oy * w + dy) * is.width + ox * w + dx] += g;
        }
  }

  static void fc_forward(const LayerParams& p, const std::vector<double>& in, std::vector<double>& out) {
    const std::size_t n_in = in.size();
    for (std::size_t o = 0; o < out.size(); ++o) {
      const double* w = p.weights.data() + o * n_in;
      double acc = p.bias[o];
      for (std::size_t i = 0; i < n_in; ++i) acc += w[i] * in[i];
      out[o] = acc;
    }
  }

  static void fc_backward(const LayerParams& p, const std::vector<double>& in,
                          const std::vector<double>& g_out, LayerParams& g, std::vector<double>* g_in) {
    const std::size_t n_in = in.size();
    for (std::size_t o = 0; o < g_out.size(); ++o) {
      const double go = g_out[o];
      g.bias[o] += go;
      double* gw = g.weights.data() + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) gw[i] += go * in[i];
      if (g_in) {
        const double* w = p.weights.data() + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) (*g_in)[i] += go * w[i];
      }
    }
  }

  static void softmax(const std::vector<double>& in, std::vector<double>& out) {
    const double m = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < in.size(); ++k) {
      out[k] = std::exp(in[k] - m);
      sum += out[k];
    }
    for (auto& v : out) v /= sum;
  }

  const NetworkSpec& spec_;
  std::vector<TensorShape> shapes_;
  std::vector<std::vector<double>> acts_;
  std::vector<std::vector<double>> grads_;
  std::vector<std::vector<double>> cols_;
  std::vector<double> g_cols_;
};

void zero_fill(Parameters& p) {
  for (auto& l : p) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

double cross_entropy(const std::vector<double>& probs, int label) {
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));
}

}  // namespace

Parameters zero_parameters(const NetworkSpec& spec) {
  validate(spec);
  Parameters p(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    p[i].weights.assign(weight_count(spec, i), 0.0);
    p[i].bias.assign(bias_count(spec, i), 0.0);
  }
  return p;
}

Parameters init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
  Parameters p = zero_parameters(spec);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (!spec.layers[i].has_parameters()) continue;
    const std::size_t fan_out = bias_count(spec, i);
    const double fan_in = static_cast<double>(p[i].weights.size()) / static_cast<double>(fan_out);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (auto& w : p[i].weights) w = dist(rng);
  }
  return p;
}

WeakLearner make_learner(const NetworkSpec& spec, std::uint64_t seed, std::uint32_t id) {
  WeakLearner l;
  l.spec = spec;
  l.params = init_parameters(spec, seed);
  l.macs = count_macs(spec);
  l.id = id;
  return l;
}

void check_consistent(const WeakLearner& learner) {
  validate(learner.spec);
  require(learner.params.size() == learner.spec.layers.size(), ErrorCode::invalid_input,
          "parameter layer count does not match spec");
  for (std::size_t i = 0; i < learner.params.size(); ++i) {
    require(learner.params[i].weights.size() == weight_count(learner.spec, i) &&
                learner.params[i].bias.size() == bias_count(learner.spec, i),
            ErrorCode::invalid_input, "parameter shape mismatch at layer " + std::to_string(i));
  }
  require(learner.macs == count_macs(learner.spec), ErrorCode::invalid_input,
          "learner MAC count does not match its spec");
}

std::vector<double> forward(const NetworkSpec& spec, const Parameters& params,
                            std::span<const double> input) {
  Engine e(spec);
  return e.run(params, input);
}

std::vector<double> forward(const WeakLearner& learner, std::span<const double> input) {
  return forward(learner.spec, learner.params, input);
}

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double accuracy(const WeakLearner& learner, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  Engine e(learner.spec);
  std::size_t correct = 0;
  for (const auto& s : samples)
    if (argmax(e.run(learner.params, s.input)) == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double sample_loss(const NetworkSpec& spec, const Parameters& params, std::span<const double> input,
                   int label, double weight) {
  Engine e(spec);
  return weight * cross_entropy(e.run(params, input), label);
}

Parameters sample_gradient(const NetworkSpec& spec, const Parameters& params,
                           std::span<const double> input, int label, double weight) {
  Engine e(spec);
  Parameters g = zero_parameters(spec);
  e.run(params, input);
  e.backward(params, label, weight, g);
  return g;
}

TrainResult train(WeakLearner learner, const Dataset& data, std::span<const double> sample_weights,
                  const TrainOptions& opt) {
  check_consistent(learner);
  require(learner.spec.input == data.shape, ErrorCode::invalid_input,
          "dataset shape does not match network input");
  require(sample_weights.empty() || sample_weights.size() == data.train.size(), ErrorCode::invalid_input,
          "sample weight count != train split size");
  for (double w : sample_weights)
    require(w > 0.0 && std::isfinite(w), ErrorCode::invalid_input, "sample weights must be positive");
  require(opt.batch_size >= 1 && opt.epochs >= 0, ErrorCode::invalid_input, "bad training options");

  TrainResult res;
  Engine e(learner.spec);
  Parameters grads = zero_parameters(learner.spec);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opt.seed);
  const std::size_t batch = static_cast<std::size_t>(opt.batch_size);

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      zero_fill(grads);
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = data.train[order[k]];
        const double w = sample_weights.empty() ? 1.0 : sample_weights[order[k]];
        const auto& probs = e.run(learner.params, s.input);
        epoch_loss += w * cross_entropy(probs, s.label);
        e.backward(learner.params, s.label, w * inv_b, grads);
      }
      for (std::size_t i = 0; i < grads.size(); ++i) {
        auto& p = learner.params[i];
        for (std::size_t k = 0; k < p.weights.size(); ++k) p.weights[k] -= opt.learning_rate * grads[i].weights[k];
        for (std::size_t k = 0; k < p.bias.size(); ++k) p.bias[k] -= opt.learning_rate * grads[i].bias[k];
      }
    }
    epoch_loss /= static_cast<double>(std::max<std::size_t>(order.size(), 1));
    if (!std::isfinite(epoch_loss))
      fail(ErrorCode::training_diverged, "training diverged at epoch " + std::to_string(epoch));
    res.loss_history.push_back(epoch_loss);
  }
  if (!data.eval.empty()) learner.eval_accuracy = accuracy(learner, data.eval);
  res.learner = std::move(learner);
  return res;
}

FcUpdate train_fc_only(WeakLearner learner, std::span<const Sample> batch,
                       std::span<const double> sample_weights, double learning_rate) {
  check_consistent(learner);
  require(!batch.empty(), ErrorCode::invalid_input, "train_fc_only needs a non-empty batch");
  require(sample_weights.empty() || sample_weights.size() == batch.size(), ErrorCode::invalid_input,
          "sample weight count != batch size");
  std::size_t first_fc = learner.spec.layers.size();
  for (std::size_t i = 0; i < learner.spec.layers.size(); ++i)
    if (learner.spec.layers[i].kind == LayerKind::fully_connected) {
      first_fc = i;
      break;
    }

  FcUpdate res;
  Engine e(learner.spec);
  Parameters grads = zero_parameters(learner.spec);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double w = sample_weights.empty() ? 1.0 : sample_weights[k];
    res.outputs.push_back(e.run(learner.params, batch[k].input));
    if (first_fc < learner.spec.layers.size())
      e.backward(learner.params, batch[k].label, w * inv_b, grads, first_fc);
  }
  if (learning_rate != 0.0) {
    for (std::size_t i = first_fc; i < learner.spec.layers.size(); ++i) {
      if (learner.spec.layers[i].kind != LayerKind::fully_connected) continue;
      auto& p = learner.params[i];
      for (std::size_t k = 0; k < p.weights.size(); ++k) p.weights[k] -= learning_rate * grads[i].weights[k];
      for (std::size_t k = 0; k < p.bias.size(); ++k) p.bias[k] -= learning_rate * grads[i].bias[k];
    }
  }
  res.learner = std::move(learner);
  return res;
}

std::uint64_t conv_checksum(const WeakLearner& learner) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::vector<double>& v) {
    for (double d : v) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &d, sizeof(double));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
      }
    }
  };
  for (std::size_t i = 0; i < learner.spec.layers.size(); ++i) {
    if (learner.spec.layers[i].kind != LayerKind::conv) continue;
    mix(learner.params[i].weights);
    mix(learner.params[i].bias);
  }
  return h;
}

GradientCheckResult gradient_check(const NetworkSpec& spec, const Parameters& params,
                                   std::span<const double> input, int label, double weight, double step) {
  const Parameters analytic = sample_gradient(spec, params, input, label, weight);
  Parameters probe = params;
  Engine e(spec);
  auto loss = [&]() { return weight * cross_entropy(e.run(probe, input), label); };
  GradientCheckResult res;
  auto check = [&](double& slot, double a) {
    const double saved = slot;
    slot = saved + step;
    const double up = loss();
    slot = saved - step;
    const double down = loss();
    slot = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double abs_err = std::abs(a - numeric);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    res.max_abs_error = std::max(res.max_abs_error, abs_err);
    res.max_rel_error = std::max(res.max_rel_error, abs_err / denom);
    ++res.checked;
  };
  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (std::size_t k = 0; k < probe[i].weights.size(); ++k) check(probe[i].weights[k], analytic[i].weights[k]);
    for (std::size_t k = 0; k < probe[i].bias.size(); ++k) check(probe[i].bias[k], analytic[i].bias[k]);
  }
  return res;
}

GradientCheckResult gradient_check(const NetworkSpec& spec, std::uint64_t seed) {
  Parameters params = init_parameters(spec, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& l : params)
    for (auto& b : l.bias) b = 0.1 * gauss(rng);
  std::vector<double> input(spec.input.size());
  for (auto& v : input) v = gauss(rng);
  std::uniform_int_distribution<int> pick(0, spec.class_count - 1);
  std::uniform_real_distribution<double> wdist(0.5, 2.0);
  const int label = pick(rng);
  const double weight = wdist(rng);
  return gradient_check(spec, params, input, label, weight);
}

}  // namespace edgeboost::nn
