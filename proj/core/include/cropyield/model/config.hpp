#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace cropyield {

/// Architecture of the CNN-LSTM. Defaults are the full-size network:
/// 300x300x12 frames, 24 steps, five 3x3 stride-2 convolutions with 16
/// filters, three 512-unit LSTM layers and a 512 -> 256 -> 64 -> 1 head.
struct ModelConfig {
  std::size_t input_height = 300;
  std::size_t input_width = 300;
  std::size_t bands = 12;
  std::size_t timesteps = 24;
  std::size_t conv_layers = 5;
  std::size_t conv_filters = 16;
  std::size_t kernel = 3;
  std::size_t stride = 2;
  std::size_t lstm_layers = 3;
  std::size_t lstm_hidden = 512;
  std::size_t head_hidden1 = 256;
  std::size_t head_hidden2 = 64;
  float dropout_keep = 0.75f;
  float leaky_slope = 0.01f;

  // Spatial (height, width) after each convolution, starting with the input.
  std::vector<std::pair<std::size_t, std::size_t>> spatial_chain() const;

  // Length of the flattened per-frame CNN feature.
  std::size_t flatten_dim() const;

  // Throws InputError/ShapeError describing the first inconsistency.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// "key = value" lines, one per field, in declaration order.
std::string describe(const ModelConfig& config);

// Name of the first field that differs, or empty when equal.
std::string first_difference(const ModelConfig& a, const ModelConfig& b);

}  // namespace cropyield
