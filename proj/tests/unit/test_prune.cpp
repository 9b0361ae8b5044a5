#include <doctest.h>

#include <cmath>

#include "common/error.hpp"
#include "nn/dataset.hpp"
#include "prune/pruner.hpp"
#include "support.hpp"

using namespace edgeboost;
using namespace testing_support;

namespace {

// Two 1x1 filters over two input channels feeding a 2-way classifier.
nn::WeakLearner two_filter_learner() {
  nn::NetworkSpec s;
  s.input = {2, 1, 1};
  s.class_count = 2;
  s.layers = {nn::LayerSpec::conv(1, 2, 1, 0), nn::LayerSpec::fully_connected(2), nn::LayerSpec::softmax()};
  auto l = nn::make_learner(s, 1);
  l.params[0].weights = {3.0, 4.0, 1.0, 0.0};
  l.params[0].bias = {0.5, -0.5};
  l.params[1].weights = {1.0, 2.0, 3.0, 4.0};
  return l;
}

nn::Dataset tiny_data(int train = 64) {
  nn::BlobDatasetOptions o;
  o.train_size = train;
  o.eval_size = 32;
  o.test_size = 8;
  return nn::make_blob_dataset(o);
}

}  // namespace

TEST_CASE("hand-set filters rank by L2 norm") {
  auto l = two_filter_learner();
  auto r = prune::rank_filters(l);
  REQUIRE(r.size() == 1);
  CHECK(r[0].filters[0].filter == 1);
  CHECK(r[0].filters[0].norm == doctest::Approx(1.0));
  CHECK(r[0].filters[1].filter == 0);
  CHECK(r[0].filters[1].norm == doctest::Approx(5.0));
}

TEST_CASE("zero filters rank first, ties break on index") {
  auto l = two_filter_learner();
  l.params[0].weights = {0.0, 0.0, 1.0, 0.0};
  CHECK(prune::rank_filters(l)[0].filters[0].filter == 0);
  l.params[0].weights = {1.0, 2.0, 1.0, 2.0};
  auto r = prune::rank_filters(l)[0].filters;
  CHECK(r[0].norm == r[1].norm);
  CHECK(r[0].filter == 0);
}

TEST_CASE("prune step keeps surviving weights and narrows the next layer") {
  auto l = two_filter_learner();
  auto p = prune::prune_step(l, {{0, {1}}});
  CHECK(p.spec.layers[0].filters == 1);
  CHECK(p.params[0].weights == std::vector<double>{3.0, 4.0});
  CHECK(p.params[0].bias == std::vector<double>{0.5});
  // FC input width halves: column 0 of each output row survives.
  CHECK(p.params[1].weights == std::vector<double>{1.0, 3.0});
  CHECK(p.macs == nn::count_macs(p.spec));
  CHECK(p.macs < l.macs);
}

TEST_CASE("empty victims leave the learner unchanged") {
  auto l = two_filter_learner();
  auto p = prune::prune_step(l, {});
  CHECK(p.spec == l.spec);
  CHECK(p.params == l.params);
}

TEST_CASE("victim selection never empties a layer") {
  auto l = nn::make_learner(small_conv_net(3), 5);
  auto v = prune::select_victims(l, 100);
  for (const auto& [layer, filters] : v) CHECK(static_cast<int>(filters.size()) < l.spec.layers[layer].filters);
}

TEST_CASE("single-filter MAC slack matches a recount") {
  auto spec = bundled_baseline();
  for (std::size_t layer : prune::prunable_layers(spec)) {
    auto smaller = spec;
    smaller.layers[layer].filters -= 1;
    CHECK(prune::single_filter_macs(spec, layer) == nn::count_macs(spec) - nn::count_macs(smaller));
  }
}

TEST_CASE("budget is rounded down") {
  CHECK(prune::mac_budget(41536, 0.25) == 10384);
  CHECK(prune::mac_budget(10, 1.0 / 3.0) == 3);
  CHECK(prune::mac_budget(10, 1.0) == 10);
}

TEST_CASE("full budget is the identity") {
  auto data = tiny_data();
  auto l = nn::make_learner(bundled_baseline(), 3);
  auto p = prune::prune_to_budget(l, data, {}, {1.0, 1, 1}, {1, 0.05, 16, 1});
  CHECK(p.params == l.params);
}

TEST_CASE("halving and quartering the bundled baseline") {
  auto data = tiny_data();
  auto base = bundled_baseline();
  const auto baseline = nn::count_macs(base);
  const auto slack = prune::max_single_filter_macs(base);
  auto l = nn::train(nn::make_learner(base, 3), data, {}, {2, 0.05, 16, 3}).learner;

  auto half = prune::prune_to_budget(l, data, {}, {0.5, 1, 1}, {1, 0.05, 16, 3});
  CHECK(half.macs == nn::count_macs(half.spec));
  CHECK(half.macs <= baseline / 2 + slack);

  auto quarter = prune::prune_to_budget(l, data, {}, {0.25, 2, 0}, {1, 0.05, 16, 3});
  CHECK(quarter.macs <= baseline / 4);
  CHECK(nn::count_parameters(quarter.spec) * 4 < nn::count_parameters(base));
}

TEST_CASE("unreachable budget is reported") {
  auto data = tiny_data();
  auto l = nn::make_learner(bundled_baseline(), 3);
  CHECK_THROWS_AS(prune::prune_to_budget(l, data, {}, {0.001, 1, 0}, {1, 0.05, 16, 1}), Error);
  try {
    prune::prune_to_budget(l, data, {}, {0.001, 1, 0}, {1, 0.05, 16, 1});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::budget_infeasible);
  }
}
