#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "boost/booster.hpp"
#include "energy/cost.hpp"
#include "energy/trace.hpp"
#include "nn/dataset.hpp"
#include "nn/network_spec.hpp"
#include "sched/qtable.hpp"
#include "sim/simulator.hpp"

namespace edgeboost::app {

struct DatasetConfig {
  std::optional<std::uint64_t> seed;  // defaults to the project seed
  nn::BlobDatasetOptions generator;
  // CSV mode when train_csv is set; paths are resolved against the config file.
  std::string train_csv, eval_csv, test_csv;
};

struct TraceConfig {
  std::string csv;  // empty: synthetic
  energy::SynthProfile profile;
  double duration = 2 * 86400.0;
  double efficiency = 1.0;
};

struct EnergyConfig {
  energy::Capacitor capacitor;
  energy::CostModel cost;
  TraceConfig trace;
  std::optional<energy::PowerThresholds> thresholds;  // terciles of the training trace when unset
};

struct SchedulerConfig {
  int episodes = 300;
  double clip_seconds = 2400.0;
  sched::QHyper hyper;
};

struct SimulationConfig {
  double request_period = 5.0;
  double duration = 2 * 86400.0;
  double start_time = 0.0;
  double initial_voltage = 4.2;
  sim::RetrainMode retrain = sim::RetrainMode::off;
  double retrain_learning_rate = 0.05;
  int drift_shift = 0;  // cyclic label shift of the request stream
};

struct ProjectConfig {
  std::string path;  // source file, for relative paths
  std::uint64_t seed = 1;
  DatasetConfig dataset;
  nn::NetworkSpec network;
  boost::PoolConfig pool;
  EnergyConfig energy;
  SchedulerConfig scheduler;
  SimulationConfig simulation;

  std::uint64_t dataset_seed() const { return dataset.seed.value_or(seed); }
  std::uint64_t pool_seed() const { return seed * 1000; }
  std::uint64_t scheduler_seed() const { return seed * 1000 + 101; }
  std::uint64_t training_trace_seed() const { return seed * 1000 + 202; }
  std::uint64_t simulation_trace_seed() const { return seed * 1000 + 303; }
  std::uint64_t request_seed() const { return seed * 1000 + 404; }
};

/// Parses and fully validates; unknown keys are rejected.
ProjectConfig parse_config(const std::string& text, const std::string& path);
ProjectConfig load_config(const std::string& path);
void validate(const ProjectConfig& cfg);

/// Single-setting override by dotted key ("scheduler.beta", "simulation.retrain", ...). Does not revalidate.
void set_option(ProjectConfig& cfg, const std::string& key, const std::string& value);

}  // namespace edgeboost::app
