#include <doctest.h>

#include <cmath>
#include <numeric>

#include "boost/booster.hpp"
#include "common/error.hpp"
#include "support.hpp"

using namespace edgeboost;
using namespace testing_support;

namespace {

nn::Dataset small_data() {
  nn::BlobDatasetOptions o;
  o.train_size = 64;
  o.eval_size = 32;
  o.test_size = 8;
  return nn::make_blob_dataset(o);
}

boost::PoolConfig small_pool(int m, int n) {
  boost::PoolConfig c;
  c.pool_size = m;
  c.ensemble_size = n;
  c.train = {2, 0.05, 16, 0};
  c.prune = {1.0, 2, 0};
  c.seed = 7;
  return c;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST_CASE("initial weights are all one") {
  CHECK(boost::init_weights(5).weights == std::vector<double>(5, 1.0));
  CHECK(boost::init_weights(1).weights == std::vector<double>{1.0});
  CHECK(boost::init_weights(5).generation == 0);
}

TEST_CASE("weight multiplier") {
  CHECK(boost::weight_multiplier(1.0, 0.5) == doctest::Approx(1.0));
  CHECK(boost::weight_multiplier(0.25, 0.5) == doctest::Approx(std::exp(-0.5 * std::log(0.25))));
  CHECK(boost::weight_multiplier(0.25, 0.5) == doctest::Approx(2.0));
  // floored probability keeps the factor finite
  CHECK(std::isfinite(boost::weight_multiplier(0.0, 0.5)));
  CHECK(boost::weight_multiplier(0.0, 0.5) == doctest::Approx(std::pow(boost::kProbabilityFloor, -0.5)));
}

TEST_CASE("update grows every imperfect sample and renormalises") {
  auto data = small_data();
  auto learner = nn::train(nn::make_learner(bundled_baseline(), 4), data, {}, {2, 0.05, 16, 4}).learner;
  auto w0 = boost::init_weights(data.train.size());
  auto raw = boost::raw_updated_weights(w0, learner, data, 0.5);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double p = nn::forward(learner, data.train[i].input)[data.train[i].label];
    if (p < 1.0) CHECK(raw[i] > w0.weights[i]);
    CHECK(raw[i] == doctest::Approx(boost::weight_multiplier(p, 0.5)));
  }
  auto w1 = boost::update_weights(w0, learner, data, 0.5);
  CHECK(std::abs(mean(w1.weights) - 1.0) < 1e-9);
  CHECK(w1.generation == 1);
}

TEST_CASE("scaled weights train identically once normalised") {
  auto data = small_data();
  std::vector<double> w(data.train.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 + double(i % 3);
  auto doubled = w;
  for (auto& x : doubled) x *= 2;
  boost::normalize_mean(w);
  boost::normalize_mean(doubled);
  auto a = nn::train(nn::make_learner(bundled_baseline(), 6), data, w, {1, 0.05, 16, 6}).learner;
  auto b = nn::train(nn::make_learner(bundled_baseline(), 6), data, doubled, {1, 0.05, 16, 6}).learner;
  CHECK(a.params == b.params);
}

TEST_CASE("single-learner pool equals a fresh budgeted learner") {
  auto data = small_data();
  auto cfg = small_pool(1, 2);
  auto pool = boost::build_pool(bundled_baseline(), data, cfg);
  REQUIRE(pool.learners.size() == 1);
  auto direct = boost::build_learner(bundled_baseline(), data, boost::init_weights(data.train.size()), cfg, 0);
  CHECK(pool.learners[0].params == direct.params);
  CHECK(pool.learners[0].macs <= prune::mac_budget(pool.baseline_macs, 0.5));
}

TEST_CASE("pool learners respect the per-learner budget") {
  auto data = small_data();
  auto cfg = small_pool(3, 2);
  auto base = bundled_baseline();
  auto pool = boost::build_pool(base, data, cfg);
  CHECK(pool.learners.size() == 3);
  for (std::size_t m = 0; m < pool.learners.size(); ++m) {
    CHECK(pool.learners[m].macs == nn::count_macs(pool.learners[m].spec));
    CHECK(pool.learners[m].macs * 2 <= pool.baseline_macs);
    CHECK(pool.learners[m].generation == static_cast<int>(m));
  }
}

TEST_CASE("pool config validation") {
  auto cfg = small_pool(4, 4);
  CHECK_THROWS_AS(boost::validate(cfg), Error);
  cfg.pool_size = 6;
  CHECK_NOTHROW(boost::validate(cfg));
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(boost::validate(cfg), Error);
}
