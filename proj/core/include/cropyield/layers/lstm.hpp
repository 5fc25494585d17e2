#pragma once

#include <array>
#include <vector>

#include "cropyield/layers/activation.hpp"
#include "cropyield/rng.hpp"
#include "cropyield/tensor.hpp"

namespace cropyield {

/// LSTM cell without peepholes. Each gate reads the concatenation
/// [h_prev, x_t] of length H + D:
///
///   f = sigma(Wf z + bf)     i = sigma(Wi z + bi)
///   g = tanh(Wc z + bc)      o = sigma(Wo z + bo)
///   c = f * c_prev + i * g   h = o * tanh(c)        (elementwise products)
template <std::floating_point T>
struct LstmCell {
  BasicTensor<T> w_forget, w_input, w_candidate, w_output;  // [H x (H + D)]
  BasicTensor<T> b_forget, b_input, b_candidate, b_output;  // [H]

  std::size_t hidden() const { return w_forget.dim(0); }
  std::size_t input_size() const { return w_forget.dim(1) - w_forget.dim(0); }

  static LstmCell zeros(std::size_t input, std::size_t hidden) {
    const Shape w{hidden, hidden + input}, b{hidden};
    return {BasicTensor<T>(w), BasicTensor<T>(w), BasicTensor<T>(w), BasicTensor<T>(w),
            BasicTensor<T>(b), BasicTensor<T>(b), BasicTensor<T>(b), BasicTensor<T>(b)};
  }

  // Uniform Glorot weights; forget-gate bias starts at 1.
  static LstmCell glorot(std::size_t input, std::size_t hidden, SeededRng& rng) {
    LstmCell cell = zeros(input, hidden);
    const double bound = glorot_bound(hidden + input, hidden);
    for (auto* w : {&cell.w_forget, &cell.w_input, &cell.w_candidate, &cell.w_output}) {
      for (auto& v : w->values()) v = static_cast<T>(rng.uniform(-bound, bound));
    }
    cell.b_forget.fill(T{1});
    return cell;
  }

  template <std::floating_point U>
  LstmCell<U> cast() const {
    return {w_forget.template cast<U>(),    w_input.template cast<U>(),  w_candidate.template cast<U>(),
            w_output.template cast<U>(),    b_forget.template cast<U>(), b_input.template cast<U>(),
            b_candidate.template cast<U>(), b_output.template cast<U>()};
  }

  // Parameter tensors in declaration order.
  std::array<BasicTensor<T>*, 8> tensors() {
    return {&w_forget, &w_input, &w_candidate, &w_output, &b_forget, &b_input, &b_candidate, &b_output};
  }
  std::array<const BasicTensor<T>*, 8> tensors() const {
    return {&w_forget, &w_input, &w_candidate, &w_output, &b_forget, &b_input, &b_candidate, &b_output};
  }
};

template <std::floating_point T>
using LstmGrads = LstmCell<T>;

template <std::floating_point T>
struct LstmState {
  BasicTensor<T> h;
  BasicTensor<T> c;
};

template <std::floating_point T>
struct LstmStepCache {
  BasicTensor<T> concat;  // [h_prev, x]
  BasicTensor<T> forget, input, candidate, output;
  BasicTensor<T> c_prev, c, tanh_c;
};

template <std::floating_point T>
struct LstmStepBackward {
  LstmGrads<T> grads;
  BasicTensor<T> input_grad;
  BasicTensor<T> h_prev_grad;
  BasicTensor<T> c_prev_grad;
};

namespace detail {

template <std::floating_point T>
void gate_preactivation(const BasicTensor<T>& w, const BasicTensor<T>& b, const BasicTensor<T>& z, T* out) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  for (std::size_t j = 0; j < rows; ++j) {
    const T* row = w.data() + j * cols;
    T acc{0};
    for (std::size_t i = 0; i < cols; ++i) acc += row[i] * z[i];
    out[j] = b[j] + acc;
  }
}

// grad_w += g z^T ; grad_b += g ; dz += w^T g
template <std::floating_point T>
void gate_backward(const BasicTensor<T>& w, const BasicTensor<T>& z, const T* g, BasicTensor<T>& grad_w,
                   BasicTensor<T>& grad_b, BasicTensor<T>& dz) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  for (std::size_t j = 0; j < rows; ++j) {
    const T gj = g[j];
    grad_b[j] += gj;
    if (gj == T{0}) continue;
    const T* row = w.data() + j * cols;
    T* grow = grad_w.data() + j * cols;
    for (std::size_t i = 0; i < cols; ++i) {
      grow[i] += gj * z[i];
      dz[i] += gj * row[i];
    }
  }
}

}  // namespace detail

template <std::floating_point T>
LstmState<T> lstm_step(const LstmCell<T>& cell, const BasicTensor<T>& x, const BasicTensor<T>& h_prev,
                       const BasicTensor<T>& c_prev, LstmStepCache<T>* cache = nullptr) {
  const std::size_t hidden = cell.hidden(), input = cell.input_size();
  if (x.size() != input || h_prev.size() != hidden || c_prev.size() != hidden) {
    throw ShapeError("lstm_step: cell is D=" + std::to_string(input) + ", H=" + std::to_string(hidden) +
                     " but got x " + to_string(x.shape()) + ", h " + to_string(h_prev.shape()) + ", c " +
                     to_string(c_prev.shape()));
  }
  BasicTensor<T> z({hidden + input});
  std::copy(h_prev.values().begin(), h_prev.values().end(), z.values().begin());
  std::copy(x.values().begin(), x.values().end(), z.values().begin() + static_cast<std::ptrdiff_t>(hidden));

  BasicTensor<T> f({hidden}), i({hidden}), g({hidden}), o({hidden});
  detail::gate_preactivation(cell.w_forget, cell.b_forget, z, f.data());
  detail::gate_preactivation(cell.w_input, cell.b_input, z, i.data());
  detail::gate_preactivation(cell.w_candidate, cell.b_candidate, z, g.data());
  detail::gate_preactivation(cell.w_output, cell.b_output, z, o.data());

  LstmState<T> next{BasicTensor<T>({hidden}), BasicTensor<T>({hidden})};
  BasicTensor<T> tanh_c({hidden});
  for (std::size_t j = 0; j < hidden; ++j) {
    f[j] = sigmoid(f[j]);
    i[j] = sigmoid(i[j]);
    g[j] = std::tanh(g[j]);
    o[j] = sigmoid(o[j]);
    next.c[j] = f[j] * c_prev[j] + i[j] * g[j];
    tanh_c[j] = std::tanh(next.c[j]);
    next.h[j] = o[j] * tanh_c[j];
  }
  if (cache) {
    *cache = {std::move(z), std::move(f), std::move(i), std::move(g), std::move(o),
              c_prev.reshaped({hidden}), next.c, std::move(tanh_c)};
  }
  return next;
}

/// Backward through one step given gradients flowing into h_t and c_t.
template <std::floating_point T>
LstmStepBackward<T> lstm_step_backward(const LstmCell<T>& cell, const LstmStepCache<T>& cache,
                                       const BasicTensor<T>& h_grad, const BasicTensor<T>& c_grad) {
  if (cache.concat.empty()) throw StateError("lstm_step_backward: no forward cache");
  const std::size_t hidden = cell.hidden(), input = cell.input_size();
  if (h_grad.size() != hidden || c_grad.size() != hidden) {
    throw ShapeError("lstm_step_backward: gradient sizes do not match H=" + std::to_string(hidden));
  }
  LstmStepBackward<T> out{LstmCell<T>::zeros(input, hidden), BasicTensor<T>({input}), BasicTensor<T>({hidden}),
                          BasicTensor<T>({hidden})};
  BasicTensor<T> df({hidden}), di({hidden}), dg({hidden}), dout({hidden});
  for (std::size_t j = 0; j < hidden; ++j) {
    const T dh = h_grad[j];
    const T dc = c_grad[j] + dh * cache.output[j] * (T{1} - cache.tanh_c[j] * cache.tanh_c[j]);
    const T f = cache.forget[j], i = cache.input[j], g = cache.candidate[j], o = cache.output[j];
    dout[j] = dh * cache.tanh_c[j] * o * (T{1} - o);
    df[j] = dc * cache.c_prev[j] * f * (T{1} - f);
    di[j] = dc * g * i * (T{1} - i);
    dg[j] = dc * i * (T{1} - g * g);
    out.c_prev_grad[j] = dc * f;
  }
  BasicTensor<T> dz({hidden + input});
  detail::gate_backward(cell.w_forget, cache.concat, df.data(), out.grads.w_forget, out.grads.b_forget, dz);
  detail::gate_backward(cell.w_input, cache.concat, di.data(), out.grads.w_input, out.grads.b_input, dz);
  detail::gate_backward(cell.w_candidate, cache.concat, dg.data(), out.grads.w_candidate, out.grads.b_candidate, dz);
  detail::gate_backward(cell.w_output, cache.concat, dout.data(), out.grads.w_output, out.grads.b_output, dz);
  std::copy_n(dz.data(), hidden, out.h_prev_grad.data());
  std::copy_n(dz.data() + hidden, input, out.input_grad.data());
  return out;
}

template <std::floating_point T>
struct LstmSequenceCache {
  std::vector<LstmStepCache<T>> steps;
};

template <std::floating_point T>
struct LstmSequenceBackward {
  LstmGrads<T> grads;
  std::vector<BasicTensor<T>> input_grads;
};

// Runs the cell over a sequence from a zero initial state; returns h_t per step.
template <std::floating_point T>
std::vector<BasicTensor<T>> lstm_forward_sequence(const LstmCell<T>& cell, const std::vector<BasicTensor<T>>& inputs,
                                                  LstmSequenceCache<T>* cache = nullptr) {
  LstmState<T> state{BasicTensor<T>({cell.hidden()}), BasicTensor<T>({cell.hidden()})};
  std::vector<BasicTensor<T>> hs;
  hs.reserve(inputs.size());
  if (cache) cache->steps.assign(inputs.size(), {});
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    state = lstm_step(cell, inputs[t], state.h, state.c, cache ? &cache->steps[t] : nullptr);
    hs.push_back(state.h);
  }
  return hs;
}

/// Backpropagation through time. `upstream[t]` is dLoss/dh_t from everything
/// above the cell at step t; the recurrent h and c paths are accumulated here.
template <std::floating_point T>
LstmSequenceBackward<T> lstm_backward_through_time(const LstmCell<T>& cell, const LstmSequenceCache<T>& cache,
                                                   const std::vector<BasicTensor<T>>& upstream) {
  if (cache.steps.empty()) throw StateError("lstm_backward_through_time: no forward cache");
  if (upstream.size() != cache.steps.size()) {
    throw ShapeError("lstm_backward_through_time: " + std::to_string(upstream.size()) + " upstream gradients for " +
                     std::to_string(cache.steps.size()) + " steps");
  }
  const std::size_t hidden = cell.hidden();
  LstmSequenceBackward<T> out{LstmCell<T>::zeros(cell.input_size(), hidden), {}};
  out.input_grads.resize(cache.steps.size());
  BasicTensor<T> dh_next({hidden}), dc_next({hidden});
  for (std::size_t t = cache.steps.size(); t-- > 0;) {
    BasicTensor<T> dh = upstream[t];
    add_into(dh, dh_next);
    auto step = lstm_step_backward(cell, cache.steps[t], dh, dc_next);
    auto dst = out.grads.tensors();
    auto src = step.grads.tensors();
    for (std::size_t p = 0; p < dst.size(); ++p) add_into(*dst[p], *src[p]);
    out.input_grads[t] = std::move(step.input_grad);
    dh_next = std::move(step.h_prev_grad);
    dc_next = std::move(step.c_prev_grad);
  }
  return out;
}

}  // namespace cropyield
