#pragma once

#include "cropyield/layers/activation.hpp"
#include "cropyield/rng.hpp"
#include "cropyield/tensor.hpp"

namespace cropyield {

// Output extent of a valid (unpadded) convolution.
inline std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride) {
  if (input < kernel) {
    throw ShapeError("convolution input extent " + std::to_string(input) + " is smaller than kernel " +
                     std::to_string(kernel));
  }
  return (input - kernel) / stride + 1;
}

/// Strided 2-D convolution with valid padding over an [H x W x D] input,
/// computed as cross-correlation (filters are not flipped).
template <std::floating_point T>
struct ConvLayer {
  BasicTensor<T> filters;  // [F x k x k x D]
  BasicTensor<T> bias;     // [F]
  std::size_t stride = 2;
  Activation activation = Activation::leaky_relu;
  T leaky_slope = static_cast<T>(kDefaultLeakySlope);

  std::size_t filter_count() const { return filters.dim(0); }
  std::size_t kernel() const { return filters.dim(1); }
  std::size_t depth() const { return filters.dim(3); }

  static ConvLayer zeros(std::size_t depth, std::size_t count, std::size_t kernel, std::size_t stride,
                         Activation act = Activation::leaky_relu) {
    return {BasicTensor<T>({count, kernel, kernel, depth}), BasicTensor<T>({count}), stride, act};
  }

  static ConvLayer glorot(std::size_t depth, std::size_t count, std::size_t kernel, std::size_t stride,
                          Activation act, SeededRng& rng) {
    ConvLayer layer = zeros(depth, count, kernel, stride, act);
    const double bound = glorot_bound(kernel * kernel * depth, kernel * kernel * count);
    for (auto& w : layer.filters.values()) w = static_cast<T>(rng.uniform(-bound, bound));
    return layer;
  }

  template <std::floating_point U>
  ConvLayer<U> cast() const {
    return {filters.template cast<U>(), bias.template cast<U>(), stride, activation, static_cast<U>(leaky_slope)};
  }
};

template <std::floating_point T>
struct ConvCache {
  BasicTensor<T> input;
  BasicTensor<T> pre_activation;
};

template <std::floating_point T>
struct ConvGrads {
  BasicTensor<T> filters;
  BasicTensor<T> bias;
};

template <std::floating_point T>
struct ConvBackward {
  ConvGrads<T> grads;
  BasicTensor<T> input_grad;
};

template <std::floating_point T>
BasicTensor<T> conv_forward(const ConvLayer<T>& layer, const BasicTensor<T>& x, ConvCache<T>* cache = nullptr) {
  if (x.rank() != 3 || x.dim(2) != layer.depth()) {
    throw ShapeError("conv_forward: expected [H x W x " + std::to_string(layer.depth()) + "] input, got " +
                     to_string(x.shape()));
  }
  const std::size_t k = layer.kernel(), s = layer.stride, depth = layer.depth(), nf = layer.filter_count();
  const std::size_t in_h = x.dim(0), in_w = x.dim(1);
  const std::size_t out_h = conv_output_extent(in_h, k, s), out_w = conv_output_extent(in_w, k, s);
  const std::size_t span = k * depth;  // contiguous run of one kernel row

  BasicTensor<T> pre({out_h, out_w, nf});
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      T* dst = pre.data() + (oy * out_w + ox) * nf;
      for (std::size_t f = 0; f < nf; ++f) {
        T acc{0};
        const T* filt = layer.filters.data() + f * k * span;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const T* src = x.data() + ((oy * s + ky) * in_w + ox * s) * depth;
          const T* w = filt + ky * span;
          for (std::size_t i = 0; i < span; ++i) acc += w[i] * src[i];
        }
        dst[f] = layer.bias[f] + acc;
      }
    }
  }
  BasicTensor<T> out = pre;
  if (layer.activation != Activation::identity) {
    for (auto& v : out.values()) v = activate(layer.activation, v, layer.leaky_slope);
  }
  if (cache) {
    cache->input = x;
    cache->pre_activation = std::move(pre);
  }
  return out;
}

template <std::floating_point T>
ConvBackward<T> conv_backward(const ConvLayer<T>& layer, const ConvCache<T>& cache, const BasicTensor<T>& upstream,
                              bool need_input_grad = true) {
  if (cache.input.empty() || cache.pre_activation.empty()) {
    throw StateError("conv_backward: no forward cache");
  }
  if (upstream.shape() != cache.pre_activation.shape()) {
    throw ShapeError("conv_backward: upstream " + to_string(upstream.shape()) + " vs output " +
                     to_string(cache.pre_activation.shape()));
  }
  const auto& x = cache.input;
  const std::size_t k = layer.kernel(), s = layer.stride, depth = layer.depth(), nf = layer.filter_count();
  const std::size_t in_w = x.dim(1);
  const std::size_t out_h = upstream.dim(0), out_w = upstream.dim(1);
  const std::size_t span = k * depth;

  ConvBackward<T> result{{BasicTensor<T>(layer.filters.shape()), BasicTensor<T>({nf})}, {}};
  if (need_input_grad) result.input_grad = BasicTensor<T>(x.shape());
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const std::size_t cell = (oy * out_w + ox) * nf;
      for (std::size_t f = 0; f < nf; ++f) {
        const T g = upstream[cell + f] *
                    activation_derivative(layer.activation, cache.pre_activation[cell + f], layer.leaky_slope);
        if (g == T{0}) continue;
        result.grads.bias[f] += g;
        const T* filt = layer.filters.data() + f * k * span;
        T* gfilt = result.grads.filters.data() + f * k * span;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::size_t base = ((oy * s + ky) * in_w + ox * s) * depth;
          const T* src = x.data() + base;
          T* gw = gfilt + ky * span;
          for (std::size_t i = 0; i < span; ++i) gw[i] += g * src[i];
          if (need_input_grad) {
            T* gsrc = result.input_grad.data() + base;
            const T* w = filt + ky * span;
            for (std::size_t i = 0; i < span; ++i) gsrc[i] += g * w[i];
          }
        }
      }
    }
  }
  return result;
}

}  // namespace cropyield
