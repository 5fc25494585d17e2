#include <gtest/gtest.h>

#include <cmath>

#include "cropyield/layers/conv.hpp"
#include "cropyield/layers/dense.hpp"
#include "cropyield/layers/dropout.hpp"
#include "cropyield/layers/lstm.hpp"
#include "gradient_suite.hpp"

namespace cropyield {
namespace {

using testing::random_tensor;

TEST(Dense, ZeroMap) {
  const auto layer = DenseLayer<float>::zeros(3, 2);
  EXPECT_EQ(dense_forward(layer, Tensor::vector({1, -2, 3})), Tensor({2}));
}

TEST(Dense, IdentityMap) {
  DenseLayer<float> layer{Tensor::identity(2), Tensor({2}), Activation::identity};
  EXPECT_EQ(dense_forward(layer, Tensor::vector({3, -1})), Tensor::vector({3, -1}));
}

TEST(Dense, LeakyActivation) {
  DenseLayer<double> layer{Tensor64::matrix({{1, 1}}), Tensor64::vector({1}), Activation::leaky_relu, 0.01};
  EXPECT_NEAR(dense_forward(layer, Tensor64::vector({-2, -1}))[0], -0.02, 1e-15);
}

TEST(Dense, InputSizeMismatch) {
  const auto layer = DenseLayer<float>::zeros(3, 2);
  EXPECT_THROW(dense_forward(layer, Tensor({4})), ShapeError);
}

TEST(Dense, BackwardLinearExample) {
  DenseLayer<double> layer{Tensor64::matrix({{2}}), Tensor64({1}), Activation::identity};
  DenseCache<double> cache;
  dense_forward(layer, Tensor64::vector({3}), &cache);
  const auto back = dense_backward(layer, cache, Tensor64::vector({1}));
  EXPECT_EQ(back.grads.weights, Tensor64::matrix({{3}}));
  EXPECT_EQ(back.grads.bias, Tensor64::vector({1}));
  EXPECT_EQ(back.input_grad, Tensor64::vector({2}));
}

TEST(Dense, ZeroUpstreamGivesZeroGrads) {
  SeededRng rng(1);
  const auto layer = DenseLayer<double>::glorot(4, 3, Activation::leaky_relu, rng);
  DenseCache<double> cache;
  dense_forward(layer, random_tensor<double>({4}, rng), &cache);
  const auto back = dense_backward(layer, cache, Tensor64({3}));
  for (const auto* t : {&back.grads.weights, &back.grads.bias, &back.input_grad}) {
    for (double v : t->values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Dense, BackwardWithoutCacheIsStateError) {
  const auto layer = DenseLayer<double>::zeros(2, 2);
  EXPECT_THROW(dense_backward(layer, DenseCache<double>{}, Tensor64({2})), StateError);
}

TEST(Dense, GradientCheck) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_LT(testing::dense_gradient_error(seed, Activation::leaky_relu), 1e-4) << "seed " << seed;
    EXPECT_LT(testing::dense_gradient_error(seed, Activation::identity), 1e-4) << "seed " << seed;
  }
}

TEST(Conv, ZeroFiltersGiveZeroOutput) {
  const auto layer = ConvLayer<float>::zeros(2, 3, 3, 2);
  SeededRng rng(2);
  const auto out = conv_forward(layer, random_tensor<float>({7, 9, 2}, rng));
  EXPECT_EQ(out.shape(), (Shape{3, 4, 3}));
  for (float v : out.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Conv, OutputExtentFormula) {
  for (std::size_t h = 3; h < 40; ++h) {
    for (std::size_t s = 1; s <= 3; ++s) EXPECT_EQ(conv_output_extent(h, 3, s), (h - 3) / s + 1);
  }
  EXPECT_THROW(conv_output_extent(2, 3, 2), ShapeError);
  const auto layer = ConvLayer<float>::zeros(1, 1, 3, 2);
  EXPECT_THROW(conv_forward(layer, Tensor({2, 5, 1})), ShapeError);
  EXPECT_THROW(conv_forward(layer, Tensor({5, 5, 2})), ShapeError);
}

TEST(Conv, DefaultShapeChainEndsAt1024) {
  std::size_t h = 300;
  std::vector<std::size_t> chain{h};
  for (int l = 0; l < 5; ++l) chain.push_back(h = conv_output_extent(h, 3, 2));
  EXPECT_EQ(chain, (std::vector<std::size_t>{300, 149, 74, 36, 17, 8}));
  EXPECT_EQ(h * h * 16, 1024u);
}

TEST(Conv, SingleWindowIsDotProduct) {
  SeededRng rng(4);
  auto layer = ConvLayer<double>::zeros(2, 1, 3, 2, Activation::identity);
  layer.filters = random_tensor<double>({1, 3, 3, 2}, rng);
  const Tensor64 x({3, 3, 2}, std::vector<double>(layer.filters.values().begin(), layer.filters.values().end()));
  double sum_sq = 0.0;
  for (double v : x.values()) sum_sq += v * v;
  ConvCache<double> cache;
  const auto out = conv_forward(layer, x, &cache);
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
  EXPECT_NEAR(out[0], sum_sq, 1e-12);
  const auto back = conv_backward(layer, cache, Tensor64({1, 1, 1}, 1.0));
  EXPECT_EQ(back.grads.filters.values().size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(back.grads.filters[i], x[i]);
}

TEST(Conv, ZeroUpstreamGivesZeroGrads) {
  SeededRng rng(5);
  const auto layer = ConvLayer<double>::glorot(2, 2, 3, 2, Activation::leaky_relu, rng);
  ConvCache<double> cache;
  const auto out = conv_forward(layer, random_tensor<double>({5, 5, 2}, rng), &cache);
  const auto back = conv_backward(layer, cache, Tensor64(out.shape()));
  for (const auto* t : {&back.grads.filters, &back.grads.bias, &back.input_grad}) {
    for (double v : t->values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Conv, BackwardWithoutCacheIsStateError) {
  const auto layer = ConvLayer<double>::zeros(1, 1, 3, 2);
  EXPECT_THROW(conv_backward(layer, ConvCache<double>{}, Tensor64({1, 1, 1})), StateError);
}

TEST(Conv, GradientCheck) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_LT(testing::conv_gradient_error(seed), 1e-4) << "seed " << seed;
  }
  EXPECT_LT(testing::conv_gradient_error(9, 9, 3, 4, 2), 1e-4);
  EXPECT_LT(testing::conv_gradient_error(10, 6, 2, 3, 1), 1e-4);
}

TEST(Lstm, ZeroCellFromZeroState) {
  const auto cell = LstmCell<double>::zeros(3, 4);
  LstmStepCache<double> cache;
  const auto s = lstm_step(cell, Tensor64::vector({1, -2, 3}), Tensor64({4}), Tensor64({4}), &cache);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(cache.forget[j], 0.5);
    EXPECT_EQ(cache.input[j], 0.5);
    EXPECT_EQ(cache.output[j], 0.5);
    EXPECT_EQ(cache.candidate[j], 0.0);
    EXPECT_EQ(s.c[j], 0.0);
    EXPECT_EQ(s.h[j], 0.0);
  }
}

TEST(Lstm, ZeroCellHalvesCellState) {
  const auto cell = LstmCell<double>::zeros(2, 3);
  const auto c = Tensor64::vector({1.0, -2.0, 4.0});
  const auto s = lstm_step(cell, Tensor64({2}), Tensor64({3}), c);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(s.c[j], 0.5 * c[j]);
    EXPECT_DOUBLE_EQ(s.h[j], 0.5 * std::tanh(0.5 * c[j]));
  }
}

TEST(Lstm, HiddenStateIsBounded) {
  SeededRng rng(6);
  const auto cell = LstmCell<double>::glorot(4, 5, rng);
  Tensor64 h({5}), c({5});
  for (int t = 0; t < 50; ++t) {
    auto s = lstm_step(cell, random_tensor<double>({4}, rng, 10.0), h, c);
    for (double v : s.h.values()) EXPECT_LE(std::abs(v), 1.0);
    h = s.h;
    c = s.c;
  }
}

TEST(Lstm, ShapeMismatch) {
  const auto cell = LstmCell<double>::zeros(3, 4);
  EXPECT_THROW(lstm_step(cell, Tensor64({2}), Tensor64({4}), Tensor64({4})), ShapeError);
  EXPECT_THROW(lstm_step(cell, Tensor64({3}), Tensor64({3}), Tensor64({4})), ShapeError);
}

TEST(Lstm, GlorotForgetBiasIsOne) {
  SeededRng rng(7);
  const auto cell = LstmCell<float>::glorot(3, 4, rng);
  for (float v : cell.b_forget.values()) EXPECT_EQ(v, 1.0f);
  for (float v : cell.b_input.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Lstm, StepGradientCheck) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_LT(testing::lstm_step_gradient_error(seed), 1e-4) << "seed " << seed;
  }
}

TEST(Lstm, BpttGradientCheck) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_LT(testing::lstm_bptt_gradient_error(seed), 1e-4) << "seed " << seed;
  }
  EXPECT_LT(testing::lstm_bptt_gradient_error(11, 1), 1e-4);
  EXPECT_LT(testing::lstm_bptt_gradient_error(12, 6, 3, 4), 1e-4);
}

TEST(Lstm, SingleStepBpttMatchesStepBackward) {
  SeededRng rng(8);
  const auto cell = LstmCell<double>::glorot(2, 3, rng);
  const auto x = random_tensor<double>({2}, rng);
  const auto r = random_tensor<double>({3}, rng);
  LstmSequenceCache<double> seq_cache;
  lstm_forward_sequence(cell, {x}, &seq_cache);
  const auto bptt = lstm_backward_through_time(cell, seq_cache, {r});
  LstmStepCache<double> step_cache;
  lstm_step(cell, x, Tensor64({3}), Tensor64({3}), &step_cache);
  const auto step = lstm_step_backward(cell, step_cache, r, Tensor64({3}));
  for (std::size_t p = 0; p < 8; ++p) EXPECT_EQ(*bptt.grads.tensors()[p], *step.grads.tensors()[p]);
  EXPECT_EQ(bptt.input_grads[0], step.input_grad);
}

TEST(Lstm, ZeroUpstreamGivesZeroGrads) {
  SeededRng rng(9);
  const auto cell = LstmCell<double>::glorot(2, 3, rng);
  LstmSequenceCache<double> cache;
  lstm_forward_sequence(cell, {random_tensor<double>({2}, rng), random_tensor<double>({2}, rng)}, &cache);
  const auto back = lstm_backward_through_time(cell, cache, {Tensor64({3}), Tensor64({3})});
  for (const auto* t : back.grads.tensors()) {
    for (double v : t->values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Lstm, BpttWithoutCacheIsStateError) {
  const auto cell = LstmCell<double>::zeros(2, 3);
  EXPECT_THROW(lstm_backward_through_time(cell, LstmSequenceCache<double>{}, {}), StateError);
}

TEST(Dropout, InferIsIdentity) {
  SeededRng rng(10);
  const auto x = random_tensor<float>({100}, rng);
  SeededRng draws(1);
  const auto r = dropout_apply(DropoutSpec{0.5, RunMode::infer}, x, draws);
  EXPECT_TRUE(bitwise_equal(r.output, x));
  for (float m : r.mask.values()) EXPECT_EQ(m, 1.0f);
  SeededRng untouched(1);
  EXPECT_EQ(draws.next_u64(), untouched.next_u64());
}

TEST(Dropout, KeepOneIsIdentity) {
  SeededRng rng(11);
  const auto x = random_tensor<float>({100}, rng);
  const auto r = dropout_apply(DropoutSpec{1.0, RunMode::train}, x, rng);
  EXPECT_TRUE(bitwise_equal(r.output, x));
  for (float m : r.mask.values()) EXPECT_EQ(m, 1.0f);
}

TEST(Dropout, KeepFractionAndExpectation) {
  const std::size_t n = 1000000;
  const Tensor64 x({n}, 2.0);
  SeededRng rng(12);
  const auto r = dropout_apply(DropoutSpec{0.75, RunMode::train}, x, rng);
  double kept = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    kept += r.mask[i];
    mean += r.output[i];
    if (r.mask[i] == 1.0) EXPECT_DOUBLE_EQ(r.output[i], 2.0 / 0.75);
    if (r.mask[i] == 0.0) EXPECT_EQ(r.output[i], 0.0);
  }
  EXPECT_NEAR(kept / n, 0.75, 0.005);
  EXPECT_NEAR(mean / n, 2.0, 0.02);
}

TEST(Dropout, BackwardUsesMask) {
  const auto mask = Tensor64::vector({1, 0, 1});
  const auto g = dropout_backward(DropoutSpec{0.5, RunMode::train}, mask, Tensor64::vector({1, 1, 3}));
  EXPECT_EQ(g, Tensor64::vector({2, 0, 6}));
}

TEST(Dropout, InvalidKeepProbability) {
  SeededRng rng(1);
  EXPECT_THROW(dropout_apply(DropoutSpec{0.0, RunMode::train}, Tensor({2}), rng), InputError);
  EXPECT_THROW(dropout_apply(DropoutSpec{1.5, RunMode::train}, Tensor({2}), rng), InputError);
}

}  // namespace
}  // namespace cropyield
