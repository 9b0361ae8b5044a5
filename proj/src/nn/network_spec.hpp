#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace edgeboost::nn {

struct TensorShape {
  int channels = 1;
  int height = 1;
  int width = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  bool operator==(const TensorShape&) const = default;
};

enum class LayerKind { conv, avg_pool, fully_connected, softmax };
enum class Activation { none, relu };

struct LayerSpec {
  LayerKind kind = LayerKind::softmax;
  // conv
  int kernel = 0;
  int filters = 0;
  int stride = 1;
  int padding = 0;
  // avg-pool
  int window = 0;
  // fully-connected
  int outputs = 0;
  Activation activation = Activation::none;

  static LayerSpec conv(int kernel, int filters, int stride = 1, int padding = 0,
                        Activation act = Activation::relu);
  static LayerSpec avg_pool(int window);
  static LayerSpec fully_connected(int outputs, Activation act = Activation::none);
  static LayerSpec softmax();

  bool has_parameters() const {
    return kind == LayerKind::conv || kind == LayerKind::fully_connected;
  }
  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  TensorShape input;
  std::vector<LayerSpec> layers;
  int class_count = 2;

  bool operator==(const NetworkSpec&) const = default;
};

/// Output shape of every layer (index i holds the output of layers[i]).
/// Throws invalid_input when the stack is not shape-valid.
std::vector<TensorShape> propagate_shapes(const NetworkSpec& spec);

/// Input shape seen by layers[i].
TensorShape layer_input_shape(const NetworkSpec& spec, std::size_t i);

void validate(const NetworkSpec& spec);

std::uint64_t count_macs(const NetworkSpec& spec);
std::vector<std::uint64_t> count_layer_macs(const NetworkSpec& spec);
std::uint64_t count_parameters(const NetworkSpec& spec);

/// Weight and bias element counts for layers[i] (zero for pool/softmax).
std::size_t weight_count(const NetworkSpec& spec, std::size_t i);
std::size_t bias_count(const NetworkSpec& spec, std::size_t i);

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const nlohmann::json& j);
NetworkSpec load_network_spec(const std::string& path);

}  // namespace edgeboost::nn
