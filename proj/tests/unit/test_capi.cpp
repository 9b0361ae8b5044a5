// Exercises the shared library through its public header only.
#include <doctest.h>

#include <edgeboost/edgeboost.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "edgeboost_capi";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

struct Config {
  eb_config* ptr = nullptr;
  Config() { REQUIRE(eb_config_load(EDGEBOOST_QUICK_CONFIG, &ptr) == EB_OK); }
  ~Config() { eb_config_free(ptr); }
};

// Builds once; later cases reuse the artifacts.
const fs::path& built_ensemble() {
  static const fs::path dir = [] {
    Config cfg;
    auto out = work_dir() / "ens";
    char* summary = nullptr;
    REQUIRE(eb_build_ensemble(cfg.ptr, out.string().c_str(), &summary) == EB_OK);
    REQUIRE(summary != nullptr);
    CHECK(std::string(summary).find("ensemble (N=2)") != std::string::npos);
    eb_string_free(summary);
    return out;
  }();
  return dir;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(eb_status_name(EB_OK)) == "ok");
  CHECK(std::string(eb_status_name(EB_ERR_LOAD)) == "load-error");
  CHECK(std::string(eb_version()).size() > 0);
}

TEST_CASE("null arguments are rejected") {
  eb_config* cfg = nullptr;
  CHECK(eb_config_load(nullptr, &cfg) == EB_ERR_INVALID_ARGUMENT);
  CHECK(std::string(eb_last_error()).size() > 0);
  CHECK(eb_build_ensemble(nullptr, "x", nullptr) == EB_ERR_INVALID_ARGUMENT);
  CHECK(eb_ensemble_size(nullptr) == 0);
  eb_config_free(nullptr);
  eb_ensemble_free(nullptr);
  eb_qtable_free(nullptr);
}

TEST_CASE("config errors map to statuses") {
  eb_config* cfg = nullptr;
  CHECK(eb_config_load("/nonexistent/edgeboost.json", &cfg) == EB_ERR_IO);
  CHECK(cfg == nullptr);
  auto bad = work_dir() / "bad.json";
  std::FILE* f = std::fopen(bad.string().c_str(), "w");
  std::fputs("{\"seed\": 1, \"bogus\": 2}", f);
  std::fclose(f);
  CHECK(eb_config_load(bad.string().c_str(), &cfg) == EB_ERR_INVALID_CONFIG);
  CHECK(std::string(eb_last_error()).find("bogus") != std::string::npos);

  Config good;
  CHECK(eb_config_set(good.ptr, "scheduler.discount", "1.5") != EB_OK);
  CHECK(eb_config_set(good.ptr, "scheduler.discount", "0.5") == EB_OK);
  CHECK(eb_config_set_seed(good.ptr, 42) == EB_OK);
  CHECK(eb_config_seed(good.ptr) == 42);
}

TEST_CASE("ensemble handle predicts like the manifest says") {
  eb_ensemble* e = nullptr;
  REQUIRE(eb_ensemble_load(built_ensemble().string().c_str(), &e) == EB_OK);
  CHECK(eb_ensemble_size(e) == 2);
  CHECK(eb_ensemble_input_size(e) == 3 * 8 * 8);
  CHECK(eb_ensemble_class_count(e) == 4);
  CHECK(eb_ensemble_learner_macs(e, 0) * 2 <= 41536);
  CHECK(eb_ensemble_learner_macs(e, 7) == 0);
  std::vector<double> x(eb_ensemble_input_size(e), 0.25);
  std::vector<double> scores(4);
  int label = -1;
  REQUIRE(eb_ensemble_predict(e, x.data(), x.size(), 2, &label, scores.data()) == EB_OK);
  CHECK(label >= 0);
  CHECK(label < 4);
  CHECK(eb_ensemble_predict(e, x.data(), x.size() - 1, 2, &label, nullptr) == EB_ERR_INVALID_ARGUMENT);
  eb_ensemble_free(e);
  CHECK(eb_ensemble_load(work_dir().string().c_str(), &e) != EB_OK);
}

TEST_CASE("scheduler training, table access and simulation") {
  Config cfg;
  const auto q = work_dir() / "q.json";
  REQUIRE(eb_train_scheduler(cfg.ptr, built_ensemble().string().c_str(), q.string().c_str(), nullptr, nullptr) ==
          EB_OK);
  CHECK(fs::exists(work_dir() / "q.curve.csv"));

  eb_qtable* t = nullptr;
  REQUIRE(eb_qtable_load(q.string().c_str(), &t) == EB_OK);
  CHECK(eb_qtable_ensemble_size(t) == 2);
  int action = -1;
  REQUIRE(eb_qtable_act(t, 3, 3, 2, 2, 0, &action) == EB_OK);
  CHECK(action == 0);  // l = N
  double v = NAN;
  CHECK(eb_qtable_value(t, 3, 3, 2, 0, 1, 1, &v) == EB_OK);
  CHECK(std::isfinite(v));
  CHECK(eb_qtable_value(t, 9, 3, 2, 0, 1, 1, &v) == EB_ERR_VALIDATION);
  eb_qtable_free(t);

  const std::string spec = "qtable:" + q.string();
  const char* policies[] = {spec.c_str(), "fixed:1"};
  char* table = nullptr;
  const auto runs = work_dir() / "runs";
  REQUIRE(eb_simulate(cfg.ptr, built_ensemble().string().c_str(), policies, 2, runs.string().c_str(),
                      EB_FORMAT_CSV, 2, nullptr, &table) == EB_OK);
  CHECK(std::string(table).find("fixed-1") != std::string::npos);
  eb_string_free(table);
  CHECK(fs::exists(runs / "all" / "report.json"));
  CHECK(fs::exists(runs / "fixed-1" / "events.csv"));

  const std::string dir = runs.string();
  const char* dirs[] = {dir.c_str()};
  REQUIRE(eb_report(dirs, 1, EB_FORMAT_JSON, &table) == EB_OK);
  CHECK(std::string(table).find("\"failure_rate_reduction\"") != std::string::npos);
  eb_string_free(table);

  const char* missing[] = {"/nonexistent/run"};
  CHECK(eb_report(missing, 1, EB_FORMAT_TEXT, &table) != EB_OK);
  CHECK(std::string(eb_last_error()).find("/nonexistent/run") != std::string::npos);

  const char* bad_policy[] = {"sometimes"};
  CHECK(eb_simulate(cfg.ptr, built_ensemble().string().c_str(), bad_policy, 1, runs.string().c_str(),
                    EB_FORMAT_TEXT, 1, nullptr, nullptr) != EB_OK);
}
