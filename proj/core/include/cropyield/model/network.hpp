#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "cropyield/layers/conv.hpp"
#include "cropyield/layers/dense.hpp"
#include "cropyield/layers/dropout.hpp"
#include "cropyield/layers/lstm.hpp"
#include "cropyield/model/params.hpp"

namespace cropyield {

/// Everything the backward pass needs from one forward pass over a sequence.
template <std::floating_point T>
struct ForwardCache {
  std::size_t steps = 0;
  DropoutSpec dropout;
  Shape feature_map_shape;                                 // last conv output, [h x w x F]
  std::vector<std::vector<ConvCache<T>>> conv;             // [step][layer]
  std::vector<LstmSequenceCache<T>> lstm;                  // [layer]
  std::vector<std::vector<BasicTensor<T>>> dropout_masks;  // [layer][step]
  std::vector<std::array<DenseCache<T>, 3>> head;          // [step]
};

namespace detail {

template <std::floating_point T>
void check_sequence(const ModelConfig& config, const BasicTensor<T>& seq) {
  if (seq.rank() != 4 || seq.dim(1) != config.input_height || seq.dim(2) != config.input_width ||
      seq.dim(3) != config.bands) {
    throw ShapeError("model expects [t x " + std::to_string(config.input_height) + " x " +
                     std::to_string(config.input_width) + " x " + std::to_string(config.bands) +
                     "] sequences, got " + to_string(seq.shape()));
  }
  if (seq.dim(0) > config.timesteps) {
    throw ShapeError("sequence has " + std::to_string(seq.dim(0)) + " frames, model is configured for " +
                     std::to_string(config.timesteps));
  }
}

template <std::floating_point T>
BasicTensor<T> frame(const BasicTensor<T>& seq, std::size_t t) {
  const std::size_t n = seq.dim(1) * seq.dim(2) * seq.dim(3);
  std::vector<T> values(seq.data() + t * n, seq.data() + (t + 1) * n);
  return BasicTensor<T>({seq.dim(1), seq.dim(2), seq.dim(3)}, std::move(values));
}

}  // namespace detail

/// Per-frame CNN feature: the conv stack applied to one [H x W x B] image,
/// flattened row-major.
template <std::floating_point T>
BasicTensor<T> cnn_features(const ModelParams<T>& params, const BasicTensor<T>& image,
                            std::vector<ConvCache<T>>* caches = nullptr, Shape* map_shape = nullptr) {
  BasicTensor<T> a = image;
  if (caches) caches->assign(params.conv.size(), {});
  for (std::size_t l = 0; l < params.conv.size(); ++l) {
    a = conv_forward(params.conv[l], a, caches ? &(*caches)[l] : nullptr);
  }
  if (map_shape) *map_shape = a.shape();
  const std::size_t n = a.size();
  return std::move(a).reshaped({n});
}

/// Raw network outputs (standardized label units), one per frame of `seq`.
///
/// `seq` is [t x H x W x B] with 1 <= t <= timesteps, already normalized. The
/// network is causal, so output k depends only on frames 0..k. Train mode
/// draws dropout masks from `rng` in (layer, step) order; infer mode never
/// touches it.
template <std::floating_point T>
BasicTensor<T> forward_raw(const ModelParams<T>& params, const BasicTensor<T>& seq, RunMode mode, SeededRng* rng,
                           ForwardCache<T>* cache = nullptr) {
  detail::check_sequence(params.config, seq);
  if (mode == RunMode::train && rng == nullptr) throw StateError("forward_raw: train mode requires a generator");
  const std::size_t steps = seq.dim(0);
  const DropoutSpec dropout{params.config.dropout_keep, mode};

  if (cache) {
    cache->steps = steps;
    cache->dropout = dropout;
    cache->conv.assign(steps, {});
    cache->lstm.assign(params.lstm.size(), {});
    cache->dropout_masks.assign(params.lstm.size(), std::vector<BasicTensor<T>>(steps));
    cache->head.assign(steps, {});
  }

  std::vector<BasicTensor<T>> layer_input(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    layer_input[t] = cnn_features(params, detail::frame(seq, t), cache ? &cache->conv[t] : nullptr,
                                  cache ? &cache->feature_map_shape : nullptr);
  }

  SeededRng unused(0);
  SeededRng& draws = rng ? *rng : unused;
  for (std::size_t l = 0; l < params.lstm.size(); ++l) {
    auto hs = lstm_forward_sequence(params.lstm[l], layer_input, cache ? &cache->lstm[l] : nullptr);
    for (std::size_t t = 0; t < steps; ++t) {
      auto dropped = dropout_apply(dropout, hs[t], draws);
      layer_input[t] = std::move(dropped.output);
      if (cache) cache->dropout_masks[l][t] = std::move(dropped.mask);
    }
  }

  BasicTensor<T> out({steps});
  for (std::size_t t = 0; t < steps; ++t) {
    BasicTensor<T> a = layer_input[t];
    for (std::size_t d = 0; d < params.head.size(); ++d) {
      a = dense_forward(params.head[d], a, cache ? &cache->head[t][d] : nullptr);
    }
    out[t] = a[0];
  }
  return out;
}

/// Yield estimate in kg/hectare for every prefix length 1..T of a
/// full-length sequence.
template <std::floating_point T>
BasicTensor<T> forward_sequence(const ModelParams<T>& params, const BasicTensor<T>& seq, RunMode mode,
                                SeededRng* rng) {
  if (seq.rank() != 4 || seq.dim(0) != params.config.timesteps) {
    throw ShapeError("forward_sequence: expected " + std::to_string(params.config.timesteps) + " frames, got " +
                     to_string(seq.shape()));
  }
  BasicTensor<T> raw = forward_raw(params, seq, mode, rng);
  for (auto& v : raw.values()) v = params.label_mean + params.label_std * v;
  return raw;
}

/// Gradients of the trainable parameters given dLoss/d(raw output) per step.
template <std::floating_point T>
ModelParams<T> backward(const ModelParams<T>& params, const ForwardCache<T>& cache, const BasicTensor<T>& raw_grad) {
  if (cache.steps == 0) throw StateError("backward: no forward cache");
  if (raw_grad.size() != cache.steps) {
    throw ShapeError("backward: " + std::to_string(raw_grad.size()) + " output gradients for " +
                     std::to_string(cache.steps) + " steps");
  }
  const std::size_t steps = cache.steps;
  ModelParams<T> grads = zeros_like(params);

  // Head, per step.
  std::vector<BasicTensor<T>> upstream(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    BasicTensor<T> g({1}, raw_grad[t]);
    for (std::size_t d = params.head.size(); d-- > 0;) {
      auto back = dense_backward(params.head[d], cache.head[t][d], g);
      add_into(grads.head[d].weights, back.grads.weights);
      add_into(grads.head[d].bias, back.grads.bias);
      g = std::move(back.input_grad);
    }
    upstream[t] = std::move(g);
  }

  // LSTM stack, top down.
  for (std::size_t l = params.lstm.size(); l-- > 0;) {
    for (std::size_t t = 0; t < steps; ++t) {
      upstream[t] = dropout_backward(cache.dropout, cache.dropout_masks[l][t], upstream[t]);
    }
    auto back = lstm_backward_through_time(params.lstm[l], cache.lstm[l], upstream);
    auto dst = grads.lstm[l].tensors();
    auto src = back.grads.tensors();
    for (std::size_t p = 0; p < dst.size(); ++p) add_into(*dst[p], *src[p]);
    upstream = std::move(back.input_grads);
  }

  // Shared CNN, accumulated over steps.
  for (std::size_t t = 0; t < steps; ++t) {
    BasicTensor<T> g = std::move(upstream[t]).reshaped(cache.feature_map_shape);
    for (std::size_t l = params.conv.size(); l-- > 0;) {
      auto back = conv_backward(params.conv[l], cache.conv[t][l], g, l > 0);
      add_into(grads.conv[l].filters, back.grads.filters);
      add_into(grads.conv[l].bias, back.grads.bias);
      g = std::move(back.input_grad);
    }
  }
  return grads;
}

/// Sum over steps of squared error against one label replicated per step.
template <std::floating_point T>
double loss_sequence(const BasicTensor<T>& predictions, double label) {
  if (predictions.empty()) throw InputError("loss_sequence: no predictions");
  double loss = 0.0;
  for (auto p : predictions.values()) {
    const double r = static_cast<double>(p) - label;
    loss += r * r;
  }
  return loss;
}

template <std::floating_point T>
BasicTensor<T> loss_sequence_gradient(const BasicTensor<T>& predictions, double label) {
  BasicTensor<T> g = predictions;
  for (auto& v : g.values()) v = static_cast<T>(2.0 * (static_cast<double>(v) - label));
  return g;
}

// Mean of the first `t` per-step predictions.
template <std::floating_point T>
double prefix_mean(const BasicTensor<T>& per_step, std::size_t t) {
  if (t < 1 || t > per_step.size()) {
    throw InputError("prefix length " + std::to_string(t) + " outside 1.." + std::to_string(per_step.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < t; ++k) sum += static_cast<double>(per_step[k]);
  return sum / static_cast<double>(t);
}

/// Early (in-season) prediction from the first t frames: mean of yhat_1..yhat_t.
template <std::floating_point T>
double predict_early(const ModelParams<T>& params, const BasicTensor<T>& seq, std::size_t t) {
  if (t < 1 || t > params.config.timesteps) {
    throw InputError("predict_early: t=" + std::to_string(t) + " outside 1.." +
                     std::to_string(params.config.timesteps));
  }
  detail::check_sequence(params.config, seq);
  if (seq.dim(0) < t) {
    throw InputError("predict_early: sequence has " + std::to_string(seq.dim(0)) + " frames, need " +
                     std::to_string(t));
  }
  BasicTensor<T> prefix = seq;
  if (seq.dim(0) != t) {
    const std::size_t n = seq.size() / seq.dim(0);
    prefix = BasicTensor<T>({t, seq.dim(1), seq.dim(2), seq.dim(3)},
                            std::vector<T>(seq.data(), seq.data() + t * n));
  }
  BasicTensor<T> raw = forward_raw(params, prefix, RunMode::infer, nullptr);
  for (auto& v : raw.values()) v = params.label_mean + params.label_std * v;
  return prefix_mean(raw, t);
}

/// Full-season prediction: mean of the per-step estimates, dropout disabled.
template <std::floating_point T>
double predict_full(const ModelParams<T>& params, const BasicTensor<T>& seq) {
  if (seq.rank() != 4 || seq.dim(0) != params.config.timesteps) {
    throw ShapeError("predict_full: expected " + std::to_string(params.config.timesteps) + " frames, got " +
                     to_string(seq.shape()));
  }
  return predict_early(params, seq, params.config.timesteps);
}

}  // namespace cropyield
