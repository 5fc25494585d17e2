#pragma once

#include <vector>

#include "cropyield/layers/conv.hpp"
#include "cropyield/layers/dense.hpp"
#include "cropyield/layers/lstm.hpp"
#include "cropyield/model/config.hpp"
#include "cropyield/rng.hpp"

namespace cropyield {

/// Trainable weights of the CNN-LSTM plus the fixed input/label scaling the
/// network was trained under.
///
/// Scaling is not trained. `input_mean`/`input_std` record the per-band
/// z-score statistics (std 0 marks a band that is passed through unchanged);
/// the pipeline applies them before calling the network. `label_mean` and
/// `label_std` map raw network outputs to kg/hectare.
template <std::floating_point T>
struct ModelParams {
  ModelConfig config;
  std::vector<ConvLayer<T>> conv;
  std::vector<LstmCell<T>> lstm;
  std::vector<DenseLayer<T>> head;  // two leaky-ReLU layers, one linear output

  BasicTensor<T> input_mean;  // [B]
  BasicTensor<T> input_std;   // [B]
  T label_mean = T{0};
  T label_std = T{1};

  static ModelParams zeros(const ModelConfig& config) {
    config.validate();
    ModelParams p;
    p.config = config;
    const auto slope = static_cast<T>(config.leaky_slope);
    std::size_t depth = config.bands;
    for (std::size_t l = 0; l < config.conv_layers; ++l) {
      p.conv.push_back(ConvLayer<T>::zeros(depth, config.conv_filters, config.kernel, config.stride));
      p.conv.back().leaky_slope = slope;
      depth = config.conv_filters;
    }
    std::size_t width = config.flatten_dim();
    for (std::size_t l = 0; l < config.lstm_layers; ++l) {
      p.lstm.push_back(LstmCell<T>::zeros(width, config.lstm_hidden));
      width = config.lstm_hidden;
    }
    p.head.push_back(DenseLayer<T>::zeros(config.lstm_hidden, config.head_hidden1, Activation::leaky_relu));
    p.head.push_back(DenseLayer<T>::zeros(config.head_hidden1, config.head_hidden2, Activation::leaky_relu));
    p.head.push_back(DenseLayer<T>::zeros(config.head_hidden2, 1, Activation::identity));
    for (auto& d : p.head) d.leaky_slope = slope;
    p.input_mean = BasicTensor<T>({config.bands});
    p.input_std = BasicTensor<T>({config.bands});
    return p;
  }

  static ModelParams initialize(const ModelConfig& config, SeededRng& rng) {
    ModelParams p = zeros(config);
    for (auto& c : p.conv) c = ConvLayer<T>::glorot(c.depth(), c.filter_count(), c.kernel(), c.stride, c.activation, rng);
    for (auto& cell : p.lstm) cell = LstmCell<T>::glorot(cell.input_size(), cell.hidden(), rng);
    for (auto& d : p.head) d = DenseLayer<T>::glorot(d.inputs(), d.outputs(), d.activation, rng);
    for (auto& c : p.conv) c.leaky_slope = static_cast<T>(config.leaky_slope);
    for (auto& d : p.head) d.leaky_slope = static_cast<T>(config.leaky_slope);
    return p;
  }

  // Visits every trainable tensor in declaration order: per conv layer
  // (filters, bias), per LSTM layer the eight gate tensors, per head layer
  // (weights, bias).
  template <typename Fn>
  void visit(Fn&& fn) {
    for (auto& c : conv) {
      fn(c.filters);
      fn(c.bias);
    }
    for (auto& cell : lstm) {
      for (auto* t : cell.tensors()) fn(*t);
    }
    for (auto& d : head) {
      fn(d.weights);
      fn(d.bias);
    }
  }

  template <typename Fn>
  void visit(Fn&& fn) const {
    for (const auto& c : conv) {
      fn(c.filters);
      fn(c.bias);
    }
    for (const auto& cell : lstm) {
      for (const auto* t : cell.tensors()) fn(*t);
    }
    for (const auto& d : head) {
      fn(d.weights);
      fn(d.bias);
    }
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    visit([&n](const BasicTensor<T>& t) { n += t.size(); });
    return n;
  }

  template <std::floating_point U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    out.config = config;
    for (const auto& c : conv) out.conv.push_back(c.template cast<U>());
    for (const auto& cell : lstm) out.lstm.push_back(cell.template cast<U>());
    for (const auto& d : head) out.head.push_back(d.template cast<U>());
    out.input_mean = input_mean.template cast<U>();
    out.input_std = input_std.template cast<U>();
    out.label_mean = static_cast<U>(label_mean);
    out.label_std = static_cast<U>(label_std);
    return out;
  }
};

// Zero tensors with the trainable shapes of `like`; used as a gradient accumulator.
template <std::floating_point T>
ModelParams<T> zeros_like(const ModelParams<T>& like) {
  ModelParams<T> out = like;
  out.visit([](BasicTensor<T>& t) { t.fill(T{0}); });
  return out;
}

// Trainable tensors concatenated in visit order.
template <std::floating_point T>
BasicTensor<T> flatten_trainable(const ModelParams<T>& p) {
  std::vector<T> flat;
  flat.reserve(p.parameter_count());
  p.visit([&flat](const BasicTensor<T>& t) { flat.insert(flat.end(), t.values().begin(), t.values().end()); });
  const std::size_t n = flat.size();
  return BasicTensor<T>({n}, std::move(flat));
}

template <std::floating_point T>
void assign_trainable(ModelParams<T>& p, const BasicTensor<T>& flat) {
  if (flat.size() != p.parameter_count()) {
    throw ShapeError("assign_trainable: " + std::to_string(flat.size()) + " values for " +
                     std::to_string(p.parameter_count()) + " parameters");
  }
  std::size_t offset = 0;
  p.visit([&](BasicTensor<T>& t) {
    std::copy_n(flat.data() + offset, t.size(), t.data());
    offset += t.size();
  });
}

}  // namespace cropyield
