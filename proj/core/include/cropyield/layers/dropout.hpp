#pragma once

#include "cropyield/rng.hpp"
#include "cropyield/tensor.hpp"

namespace cropyield {

enum class RunMode { train, infer };

struct DropoutSpec {
  double keep_prob = 0.75;
  RunMode mode = RunMode::infer;
};

template <std::floating_point T>
struct DropoutResult {
  BasicTensor<T> output;
  BasicTensor<T> mask;  // 1 where kept, 0 where dropped
};

/// Inverted dropout: in train mode each element survives with probability
/// keep_prob and is scaled by 1/keep_prob. Infer mode is the identity and
/// draws nothing from the generator.
template <std::floating_point T>
DropoutResult<T> dropout_apply(const DropoutSpec& spec, const BasicTensor<T>& x, SeededRng& rng) {
  if (!(spec.keep_prob > 0.0 && spec.keep_prob <= 1.0)) {
    throw InputError("dropout keep_prob must lie in (0, 1], got " + std::to_string(spec.keep_prob));
  }
  DropoutResult<T> out{x, BasicTensor<T>(x.shape(), T{1})};
  if (spec.mode == RunMode::infer || spec.keep_prob == 1.0) return out;
  const T inv_keep = static_cast<T>(1.0 / spec.keep_prob);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (rng.bernoulli(spec.keep_prob)) {
      out.output[i] = x[i] * inv_keep;
    } else {
      out.output[i] = T{0};
      out.mask[i] = T{0};
    }
  }
  return out;
}

template <std::floating_point T>
BasicTensor<T> dropout_backward(const DropoutSpec& spec, const BasicTensor<T>& mask, const BasicTensor<T>& upstream) {
  require_same_shape(mask, upstream, "dropout_backward");
  if (spec.mode == RunMode::infer || spec.keep_prob == 1.0) return upstream;
  const T inv_keep = static_cast<T>(1.0 / spec.keep_prob);
  BasicTensor<T> out = upstream;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i] * inv_keep;
  return out;
}

}  // namespace cropyield
