#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ensemble/ensemble.hpp"
#include "nn/learner.hpp"

namespace edgeboost::io {

inline constexpr int kFormatVersion = 1;

/// Writes <dir>/<stem>.json (spec + metadata) and <dir>/<stem>.bin (little-endian doubles).
void save_learner(const nn::WeakLearner& learner, const std::string& dir, const std::string& stem);
nn::WeakLearner load_learner(const std::string& json_path);

struct PoolInfo {
  std::vector<nn::WeakLearner> learners;
  std::vector<std::string> files;  // relative to the pool directory
  std::uint64_t baseline_macs = 0;
  std::uint64_t baseline_parameters = 0;
};

void save_pool(const PoolInfo& pool, const std::string& dir);
PoolInfo load_pool(const std::string& dir);

/// Manifest with learner order, vote weights, profile and learner file references
/// (relative to the manifest's directory).
void save_ensemble(const ensemble::EnsembleModel& model, const std::vector<std::string>& learner_files,
                   std::uint64_t baseline_macs, const std::string& path);

struct EnsembleInfo {
  ensemble::EnsembleModel model;
  std::uint64_t baseline_macs = 0;
};

EnsembleInfo load_ensemble(const std::string& path);

}  // namespace edgeboost::io
