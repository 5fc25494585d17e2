#pragma once

// Finite-difference checks of every backward pass, shared by the unit tests
// and the acceptance binary. Each returns the worst relative error over all
// checked tensors. The objective is a fixed random projection of the output,
// so every output element contributes.

#include <algorithm>
#include <vector>

#include "cropyield/gradient_check.hpp"
#include "cropyield/layers/conv.hpp"
#include "cropyield/layers/dense.hpp"
#include "cropyield/layers/lstm.hpp"
#include "cropyield/model/network.hpp"
#include "test_support.hpp"

namespace cropyield::testing {

inline double project(const Tensor64& out, const Tensor64& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * weights[i];
  return s;
}

// Perturbs `slot` (a tensor inside `base`) and evaluates `objective` on the copy.
template <class Owner, class Objective>
double check_slot(const Owner& base, Tensor64 Owner::*slot, const Tensor64& analytic, Objective objective) {
  const auto f = [&](const Tensor64& value) {
    Owner copy = base;
    copy.*slot = value;
    return objective(copy);
  };
  return gradient_check(f, base.*slot, analytic, 1e-5);
}

inline double dense_gradient_error(std::uint64_t seed, Activation act = Activation::leaky_relu) {
  SeededRng rng(seed);
  auto layer = DenseLayer<double>::glorot(5, 4, act, rng);
  layer.bias = random_tensor<double>({4}, rng, 0.5);
  const auto x = random_tensor<double>({5}, rng);
  const auto r = random_tensor<double>({4}, rng);
  DenseCache<double> cache;
  dense_forward(layer, x, &cache);
  const auto back = dense_backward(layer, cache, r);
  const auto objective = [&](const DenseLayer<double>& l) { return project(dense_forward(l, x), r); };
  double err = 0.0;
  err = std::max(err, check_slot(layer, &DenseLayer<double>::weights, back.grads.weights, objective));
  err = std::max(err, check_slot(layer, &DenseLayer<double>::bias, back.grads.bias, objective));
  err = std::max(err, gradient_check([&](const Tensor64& v) { return project(dense_forward(layer, v), r); }, x,
                                     back.input_grad, 1e-5));
  return err;
}

inline double conv_gradient_error(std::uint64_t seed, std::size_t size = 5, std::size_t depth = 2,
                                  std::size_t filters = 2, std::size_t stride = 2) {
  SeededRng rng(seed);
  auto layer = ConvLayer<double>::glorot(depth, filters, 3, stride, Activation::leaky_relu, rng);
  layer.bias = random_tensor<double>({filters}, rng, 0.5);
  const auto x = random_tensor<double>({size, size, depth}, rng);
  ConvCache<double> cache;
  const auto out = conv_forward(layer, x, &cache);
  const auto r = random_tensor<double>(out.shape(), rng);
  const auto back = conv_backward(layer, cache, r);
  const auto objective = [&](const ConvLayer<double>& l) { return project(conv_forward(l, x), r); };
  double err = 0.0;
  err = std::max(err, check_slot(layer, &ConvLayer<double>::filters, back.grads.filters, objective));
  err = std::max(err, check_slot(layer, &ConvLayer<double>::bias, back.grads.bias, objective));
  err = std::max(err, gradient_check([&](const Tensor64& v) { return project(conv_forward(layer, v), r); }, x,
                                     back.input_grad, 1e-5));
  return err;
}

inline double lstm_step_gradient_error(std::uint64_t seed, std::size_t d = 3, std::size_t h = 4) {
  SeededRng rng(seed);
  auto cell = LstmCell<double>::glorot(d, h, rng);
  for (auto* b : cell.tensors()) {
    if (b->rank() == 1) *b = random_tensor<double>({h}, rng, 0.5);
  }
  const auto x = random_tensor<double>({d}, rng);
  const auto h0 = random_tensor<double>({h}, rng, 0.5);
  const auto c0 = random_tensor<double>({h}, rng, 0.5);
  const auto rh = random_tensor<double>({h}, rng);
  const auto rc = random_tensor<double>({h}, rng);
  LstmStepCache<double> cache;
  lstm_step(cell, x, h0, c0, &cache);
  const auto back = lstm_step_backward(cell, cache, rh, rc);
  const auto objective = [&](const LstmCell<double>& c, const Tensor64& xi, const Tensor64& hi, const Tensor64& ci) {
    const auto s = lstm_step(c, xi, hi, ci);
    return project(s.h, rh) + project(s.c, rc);
  };
  double err = 0.0;
  const auto grads = back.grads.tensors();
  for (std::size_t p = 0; p < 8; ++p) {
    const auto f = [&](const Tensor64& v) {
      auto copy = cell;
      *copy.tensors()[p] = v;
      return objective(copy, x, h0, c0);
    };
    err = std::max(err, gradient_check(f, *cell.tensors()[p], *grads[p], 1e-5));
  }
  err = std::max(err, gradient_check([&](const Tensor64& v) { return objective(cell, v, h0, c0); }, x,
                                     back.input_grad, 1e-5));
  err = std::max(err, gradient_check([&](const Tensor64& v) { return objective(cell, x, v, c0); }, h0,
                                     back.h_prev_grad, 1e-5));
  err = std::max(err, gradient_check([&](const Tensor64& v) { return objective(cell, x, h0, v); }, c0,
                                     back.c_prev_grad, 1e-5));
  return err;
}

inline double lstm_bptt_gradient_error(std::uint64_t seed, std::size_t steps = 3, std::size_t d = 2,
                                       std::size_t h = 3) {
  SeededRng rng(seed);
  auto cell = LstmCell<double>::glorot(d, h, rng);
  std::vector<Tensor64> xs, rs;
  for (std::size_t t = 0; t < steps; ++t) {
    xs.push_back(random_tensor<double>({d}, rng));
    rs.push_back(random_tensor<double>({h}, rng));
  }
  const auto objective = [&](const LstmCell<double>& c, const std::vector<Tensor64>& inputs) {
    const auto hs = lstm_forward_sequence(c, inputs);
    double s = 0.0;
    for (std::size_t t = 0; t < hs.size(); ++t) s += project(hs[t], rs[t]);
    return s;
  };
  LstmSequenceCache<double> cache;
  lstm_forward_sequence(cell, xs, &cache);
  const auto back = lstm_backward_through_time(cell, cache, rs);
  double err = 0.0;
  const auto grads = back.grads.tensors();
  for (std::size_t p = 0; p < 8; ++p) {
    const auto f = [&](const Tensor64& v) {
      auto copy = cell;
      *copy.tensors()[p] = v;
      return objective(copy, xs);
    };
    err = std::max(err, gradient_check(f, *cell.tensors()[p], *grads[p], 1e-5));
  }
  for (std::size_t t = 0; t < steps; ++t) {
    const auto f = [&](const Tensor64& v) {
      auto inputs = xs;
      inputs[t] = v;
      return objective(cell, inputs);
    };
    err = std::max(err, gradient_check(f, xs[t], back.input_grads[t], 1e-5));
  }
  return err;
}

// Tiny end-to-end network: 16x16x3 frames, two convolutions, T=3, hidden 8.
inline ModelConfig tiny_model_config() {
  ModelConfig c;
  c.input_height = c.input_width = 16;
  c.bands = 3;
  c.timesteps = 3;
  c.conv_layers = 2;
  c.conv_filters = 4;
  c.lstm_layers = 2;
  c.lstm_hidden = 8;
  c.head_hidden1 = 8;
  c.head_hidden2 = 4;
  return c;
}

/// Gradient of loss_sequence(forward_raw(...), label) over every trainable
/// parameter. Train mode replays the same dropout masks through a fixed seed.
inline double end_to_end_gradient_error(std::uint64_t seed, RunMode mode) {
  const ModelConfig config = tiny_model_config();
  SeededRng rng(seed);
  auto params = ModelParams<double>::initialize(config, rng);
  for (auto& layer : params.head) layer.bias = random_tensor<double>(layer.bias.shape(), rng, 0.1);
  const auto seq = random_tensor<double>({config.timesteps, 16, 16, config.bands}, rng);
  const std::uint64_t dropout_seed = seed * 31 + 7;

  // Label a little off the current output keeps the loss small, so the
  // difference quotient's rounding noise stays below the smallest gradients.
  double label = 0.02;
  {
    SeededRng drop(dropout_seed);
    const auto start = forward_raw(params, seq, mode, &drop);
    for (auto v : start.values()) label += v / static_cast<double>(start.size());
  }

  const auto loss_of = [&](const ModelParams<double>& p) {
    SeededRng drop(dropout_seed);
    return loss_sequence(forward_raw(p, seq, mode, &drop), label);
  };
  SeededRng drop(dropout_seed);
  ForwardCache<double> cache;
  const auto raw = forward_raw(params, seq, mode, &drop, &cache);
  const auto grads = backward(params, cache, loss_sequence_gradient(raw, label));

  const auto f = [&](const Tensor64& flat) {
    auto copy = params;
    assign_trainable(copy, flat);
    return loss_of(copy);
  };
  return gradient_check(f, flatten_trainable(params), flatten_trainable(grads), 1e-5);
}

}  // namespace cropyield::testing
