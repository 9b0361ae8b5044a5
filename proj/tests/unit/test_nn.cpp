#include <doctest.h>

#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "nn/dataset.hpp"
#include "nn/learner.hpp"
#include "support.hpp"

using namespace edgeboost;
using namespace testing_support;

TEST_CASE("zero final weights give a uniform distribution") {
  auto spec = small_conv_net(3, 5);
  auto params = nn::init_parameters(spec, 4);
  params[3].weights.assign(params[3].weights.size(), 0.0);
  params[3].bias.assign(params[3].bias.size(), 0.0);
  std::vector<double> x(spec.input.size(), 0.7);
  for (double p : nn::forward(spec, params, x)) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("probabilities sum to one") {
  auto spec = small_conv_net();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto params = nn::init_parameters(spec, seed);
    std::vector<double> x(spec.input.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(double(i) * seed);
    auto p = nn::forward(spec, params, x);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("single FC layer matches hand softmax") {
  auto spec = fc_net(2, 2);
  nn::Parameters params = nn::zero_parameters(spec);
  params[0].weights = {1.0, -2.0, 0.5, 3.0};  // row-major [output][input]
  params[0].bias = {0.1, -0.3};
  std::vector<double> x = {0.4, 0.2};
  const double z0 = 1.0 * 0.4 - 2.0 * 0.2 + 0.1;
  const double z1 = 0.5 * 0.4 + 3.0 * 0.2 - 0.3;
  const double p1 = std::exp(z1) / (std::exp(z0) + std::exp(z1));
  auto p = nn::forward(spec, params, x);
  CHECK(p[0] == doctest::Approx(1.0 - p1).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(p1).epsilon(1e-12));
}

TEST_CASE("MAC counting") {
  nn::NetworkSpec unit;
  unit.input = {1, 1, 1};
  unit.class_count = 1;
  unit.layers = {nn::LayerSpec::conv(1, 1, 1, 0, nn::Activation::none)};
  CHECK(nn::count_layer_macs(unit)[0] == 1);

  nn::NetworkSpec c;
  c.input = {3, 32, 32};
  c.layers = {nn::LayerSpec::conv(3, 16, 1, 1)};
  CHECK(nn::count_layer_macs(c)[0] == 3ull * 16 * 9 * 32 * 32);
  CHECK(nn::count_layer_macs(c)[0] == 442368);

  nn::NetworkSpec f;
  f.input = {64, 1, 1};
  f.layers = {nn::LayerSpec::fully_connected(10)};
  CHECK(nn::count_macs(f) == 640);

  auto base = bundled_baseline();
  // conv 3->8 on 8x8, conv 8->16 on 4x4, conv 16->16 on 2x2, fc 16->4
  CHECK(nn::count_macs(base) == 3ull * 8 * 9 * 64 + 8ull * 16 * 9 * 16 + 16ull * 16 * 9 * 4 + 16 * 4);
  CHECK(nn::count_parameters(base) == (3 * 8 * 9 + 8) + (8 * 16 * 9 + 16) + (16 * 16 * 9 + 16) + (16 * 4 + 4));
}

TEST_CASE("shape validation rejects impossible stacks") {
  nn::NetworkSpec s;
  s.input = {1, 2, 2};
  s.layers = {nn::LayerSpec::conv(5, 2)};
  CHECK_THROWS_AS(nn::validate(s), Error);
}

TEST_CASE("backprop agrees with an independent finite-difference oracle") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto spec = small_conv_net();
    auto params = nn::init_parameters(spec, seed);
    std::vector<double> x(spec.input.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::cos(0.37 * double(i) + double(seed));
    auto analytic = nn::sample_gradient(spec, params, x, 1, 1.3);
    auto numeric = numeric_gradient(spec, params, x, 1, 1.3);
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto cmp = [&](const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t k = 0; k < a.size(); ++k)
          worst = std::max(worst, std::abs(a[k] - b[k]) / std::max(1e-8, std::abs(a[k]) + std::abs(b[k])));
      };
      cmp(analytic[i].weights, numeric[i].weights);
      cmp(analytic[i].bias, numeric[i].bias);
    }
    CHECK(worst < 1e-4);
    CHECK(nn::gradient_check(spec, seed).max_rel_error < 1e-4);
  }
}

TEST_CASE("zero net: bias gradients match finite differences") {
  auto spec = small_conv_net();
  auto params = nn::zero_parameters(spec);
  std::vector<double> x(spec.input.size(), 0.0);
  auto analytic = nn::sample_gradient(spec, params, x, 0, 1.0);
  auto numeric = numeric_gradient(spec, params, x, 0, 1.0);
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t k = 0; k < params[i].bias.size(); ++k)
      CHECK(std::abs(analytic[i].bias[k] - numeric[i].bias[k]) < 1e-8);
}

TEST_CASE("unit sample weights reproduce unweighted training") {
  nn::BlobDatasetOptions o;
  o.train_size = 48;
  o.eval_size = 16;
  o.test_size = 16;
  auto ds = nn::make_blob_dataset(o);
  auto spec = bundled_baseline();
  nn::TrainOptions opt{2, 0.05, 8, 3};
  auto plain = nn::train(nn::make_learner(spec, 9), ds, {}, opt).learner;
  std::vector<double> ones(ds.train.size(), 1.0);
  auto weighted = nn::train(nn::make_learner(spec, 9), ds, ones, opt).learner;
  CHECK(plain.params == weighted.params);
}

TEST_CASE("separable two-class problem trains to high accuracy") {
  nn::BlobDatasetOptions o;
  o.seed = 1;
  o.classes = 2;
  o.noise = 0.1;
  o.distractor = 0.0;
  o.train_size = 120;
  o.eval_size = 60;
  o.test_size = 20;
  auto ds = nn::make_blob_dataset(o);
  auto spec = bundled_baseline();
  spec.class_count = 2;
  spec.layers[6] = nn::LayerSpec::fully_connected(2);
  auto res = nn::train(nn::make_learner(spec, 2), ds, {}, {50, 0.05, 16, 1});
  CHECK(res.learner.eval_accuracy >= 0.95);
  CHECK(res.loss_history.back() < res.loss_history.front());
}

TEST_CASE("FC-only step: zero rate is identity and outputs equal forward") {
  auto spec = small_conv_net();
  auto learner = nn::make_learner(spec, 21);
  nn::Sample s{std::vector<double>(spec.input.size(), 0.3), 2};
  auto res = nn::train_fc_only(learner, std::span<const nn::Sample>(&s, 1), {}, 0.0);
  CHECK(res.learner.params == learner.params);
  CHECK(res.outputs[0] == nn::forward(learner, s.input));
}

TEST_CASE("FC-only step freezes conv layers and follows the numeric gradient") {
  auto spec = small_conv_net();
  auto learner = nn::make_learner(spec, 22);
  std::vector<double> x(spec.input.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.9 * double(i));
  nn::Sample s{x, 0};
  const double lr = 0.1;
  auto res = nn::train_fc_only(learner, std::span<const nn::Sample>(&s, 1), {}, lr);
  CHECK(nn::conv_checksum(res.learner) == nn::conv_checksum(learner));
  auto g = numeric_gradient(spec, learner.params, x, 0, 1.0);
  const auto& before = learner.params[3];
  const auto& after = res.learner.params[3];
  for (std::size_t k = 0; k < before.weights.size(); ++k)
    CHECK(after.weights[k] == doctest::Approx(before.weights[k] - lr * g[3].weights[k]).epsilon(1e-7));
  for (std::size_t k = 0; k < before.bias.size(); ++k)
    CHECK(after.bias[k] == doctest::Approx(before.bias[k] - lr * g[3].bias[k]).epsilon(1e-7));
}

TEST_CASE("dataset generator is deterministic and label shift is cyclic") {
  nn::BlobDatasetOptions o;
  o.train_size = 20;
  auto a = nn::make_blob_dataset(o);
  auto b = nn::make_blob_dataset(o);
  CHECK(a.train[7].input == b.train[7].input);
  auto shifted = nn::shift_labels(a, 3);
  for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(shifted.train[i].label == (a.train[i].label + 3) % 4);
}
