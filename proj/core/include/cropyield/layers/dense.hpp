#pragma once

#include "cropyield/layers/activation.hpp"
#include "cropyield/rng.hpp"
#include "cropyield/tensor.hpp"

namespace cropyield {

/// Fully connected layer: z_j = f(b_j + W_j . x).
template <std::floating_point T>
struct DenseLayer {
  BasicTensor<T> weights;  // [out x in]
  BasicTensor<T> bias;     // [out]
  Activation activation = Activation::identity;
  T leaky_slope = static_cast<T>(kDefaultLeakySlope);

  std::size_t inputs() const { return weights.dim(1); }
  std::size_t outputs() const { return weights.dim(0); }

  static DenseLayer zeros(std::size_t in, std::size_t out, Activation act = Activation::identity) {
    return {BasicTensor<T>({out, in}), BasicTensor<T>({out}), act};
  }

  static DenseLayer glorot(std::size_t in, std::size_t out, Activation act, SeededRng& rng) {
    DenseLayer layer = zeros(in, out, act);
    const double bound = glorot_bound(in, out);
    for (auto& w : layer.weights.values()) w = static_cast<T>(rng.uniform(-bound, bound));
    return layer;
  }

  template <std::floating_point U>
  DenseLayer<U> cast() const {
    return {weights.template cast<U>(), bias.template cast<U>(), activation, static_cast<U>(leaky_slope)};
  }
};

template <std::floating_point T>
struct DenseCache {
  BasicTensor<T> input;
  BasicTensor<T> pre_activation;
};

template <std::floating_point T>
struct DenseGrads {
  BasicTensor<T> weights;
  BasicTensor<T> bias;
};

template <std::floating_point T>
struct DenseBackward {
  DenseGrads<T> grads;
  BasicTensor<T> input_grad;
};

template <std::floating_point T>
BasicTensor<T> dense_forward(const DenseLayer<T>& layer, const BasicTensor<T>& x, DenseCache<T>* cache = nullptr) {
  const std::size_t in = layer.inputs(), out = layer.outputs();
  if (x.size() != in) {
    throw ShapeError("dense_forward: layer expects " + std::to_string(in) + " inputs, got " + to_string(x.shape()));
  }
  BasicTensor<T> pre({out});
  BasicTensor<T> z({out});
  const T* w = layer.weights.data();
  for (std::size_t j = 0; j < out; ++j) {
    T acc{0};
    const T* row = w + j * in;
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    pre[j] = layer.bias[j] + acc;
    z[j] = activate(layer.activation, pre[j], layer.leaky_slope);
  }
  if (cache) {
    cache->input = x.reshaped({in});
    cache->pre_activation = std::move(pre);
  }
  return z;
}

template <std::floating_point T>
DenseBackward<T> dense_backward(const DenseLayer<T>& layer, const DenseCache<T>& cache, const BasicTensor<T>& upstream) {
  if (cache.input.empty() || cache.pre_activation.empty()) {
    throw StateError("dense_backward: no forward cache");
  }
  const std::size_t in = layer.inputs(), out = layer.outputs();
  if (upstream.size() != out) {
    throw ShapeError("dense_backward: upstream " + to_string(upstream.shape()) + " for " + std::to_string(out) +
                     " outputs");
  }
  DenseBackward<T> result{{BasicTensor<T>({out, in}), BasicTensor<T>({out})}, BasicTensor<T>({in})};
  for (std::size_t j = 0; j < out; ++j) {
    const T g = upstream[j] * activation_derivative(layer.activation, cache.pre_activation[j], layer.leaky_slope);
    result.grads.bias[j] = g;
    if (g == T{0}) continue;
    T* gw = result.grads.weights.data() + j * in;
    const T* row = layer.weights.data() + j * in;
    for (std::size_t i = 0; i < in; ++i) {
      gw[i] = g * cache.input[i];
      result.input_grad[i] += g * row[i];
    }
  }
  return result;
}

}  // namespace cropyield
