#pragma once

#include <concepts>

#include "cropyield/tensor.hpp"

namespace cropyield {

enum class Activation { identity, leaky_relu };

inline constexpr double kDefaultLeakySlope = 0.01;

template <std::floating_point T>
T activate(Activation act, T pre, T slope) {
  return act == Activation::leaky_relu ? leaky_relu(pre, slope) : pre;
}

template <std::floating_point T>
T activation_derivative(Activation act, T pre, T slope) {
  return act == Activation::leaky_relu ? leaky_relu_derivative(pre, slope) : T{1};
}

// Glorot-style uniform bound sqrt(6 / (fan_in + fan_out)).
inline double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace cropyield
