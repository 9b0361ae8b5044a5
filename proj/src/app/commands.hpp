#pragma once

#include <memory>
#include <string>
#include <vector>

#include "app/config.hpp"
#include "ensemble/ensemble.hpp"
#include "sched/trainer.hpp"
#include "sim/report.hpp"

namespace edgeboost::app {

using Warnings = std::vector<std::string>;

nn::Dataset make_dataset(const ProjectConfig& cfg);

/// Synthetic traces use distinct seeds for training and simulation; a CSV (config or
/// override) is used for both.
energy::PowerTrace training_trace(const ProjectConfig& cfg, const std::string& trace_override = "");
energy::PowerTrace simulation_trace(const ProjectConfig& cfg, const std::string& trace_override = "");

energy::PowerThresholds power_thresholds(const ProjectConfig& cfg, const energy::PowerTrace& training,
                                         Warnings* warnings = nullptr);

sched::EnvConfig env_config(const ProjectConfig& cfg, const energy::PowerThresholds& thresholds);
sim::SimConfig sim_config(const ProjectConfig& cfg, const energy::PowerThresholds& thresholds);

struct BuildResult {
  nn::Dataset data;
  boost::PoolResult pool;
  ensemble::EnsembleModel model;
  std::uint64_t max_single_filter_macs = 0;
};

BuildResult build_ensemble(const ProjectConfig& cfg);

sched::TrainingResult train_scheduler(const ProjectConfig& cfg, const ensemble::EnsembleModel& model,
                                      const std::string& trace_override = "");

/// Parses all | fixed:k | qtable:PATH. Tables are loaded into `storage`.
sim::Policy parse_policy(const std::string& spec, int n, std::vector<std::unique_ptr<sched::QTable>>& storage);

/// Slug used as the run directory name.
std::string policy_slug(const std::string& spec);

// File-producing commands. Each returns a human-readable summary.
std::string cmd_build_ensemble(const ProjectConfig& cfg, const std::string& out_dir, Warnings& warnings);
std::string cmd_train_scheduler(const ProjectConfig& cfg, const std::string& ensemble_dir, const std::string& out_path,
                                const std::string& trace_override, Warnings& warnings);
std::string cmd_simulate(const ProjectConfig& cfg, const std::string& ensemble_dir,
                         const std::vector<std::string>& policies, const std::string& out_dir, sim::Format format,
                         int jobs, const std::string& trace_override, Warnings& warnings);
std::string cmd_report(const std::vector<std::string>& run_dirs, sim::Format format);

}  // namespace edgeboost::app
