#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nn/network_spec.hpp"

namespace edgeboost::nn {

struct Sample {
  std::vector<double> input;
  int label = 0;
};

struct Dataset {
  TensorShape shape;
  int class_count = 2;
  std::vector<Sample> train;
  std::vector<Sample> eval;
  std::vector<Sample> test;
};

void validate(const Dataset& ds);

// Gaussian-blob "images": every class owns a few coloured blobs at fixed
// positions; samples jitter the blobs, add a weaker blob borrowed from another
// class and per-pixel noise.
struct BlobDatasetOptions {
  std::uint64_t seed = 1;
  int classes = 4;
  TensorShape shape{3, 8, 8};
  int train_size = 400;
  int eval_size = 200;
  int test_size = 400;
  int blobs_per_class = 2;
  double noise = 0.35;
  double jitter = 0.8;
  double distractor = 1.0;
  int label_shift = 0;
};

Dataset make_blob_dataset(const BlobDatasetOptions& opt);

/// Cyclic relabelling y -> (y + shift) mod C on every split.
Dataset shift_labels(Dataset ds, int shift);

/// CSV rows: label, then shape.size() pixel values. A header row is skipped
/// when its first field is not an integer.
std::vector<Sample> load_csv_samples(const std::string& path, const TensorShape& shape, int classes);

}  // namespace edgeboost::nn
