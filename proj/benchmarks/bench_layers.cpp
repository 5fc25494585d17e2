#include <benchmark/benchmark.h>

#include "cropyield/layers/conv.hpp"
#include "cropyield/layers/lstm.hpp"
#include "cropyield/model/network.hpp"

namespace {

using namespace cropyield;

Tensor random_tensor(Shape shape, SeededRng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<float>(rng.normal());
  return t;
}

void BM_ConvForward(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  SeededRng rng(1);
  const auto layer = ConvLayer<float>::glorot(12, 16, 3, 2, Activation::leaky_relu, rng);
  const Tensor image = random_tensor({size, size, 12}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(conv_forward(layer, image));
}
BENCHMARK(BM_ConvForward)->Arg(64)->Arg(300);

void BM_LstmStep(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  SeededRng rng(2);
  const auto cell = LstmCell<float>::glorot(1024, hidden, rng);
  const Tensor x = random_tensor({1024}, rng);
  const Tensor h({hidden}), c({hidden});
  for (auto _ : state) benchmark::DoNotOptimize(lstm_step(cell, x, h, c));
}
BENCHMARK(BM_LstmStep)->Arg(64)->Arg(512);

void BM_ForwardSequence(benchmark::State& state) {
  ModelConfig config;
  config.input_height = config.input_width = 32;
  config.timesteps = 24;
  config.conv_layers = 3;
  config.lstm_layers = 1;
  config.lstm_hidden = 32;
  config.head_hidden1 = 16;
  config.head_hidden2 = 8;
  SeededRng rng(3);
  const auto params = ModelParams<float>::initialize(config, rng);
  const Tensor seq = random_tensor({24, 32, 32, 12}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward_sequence(params, seq, RunMode::infer, nullptr));
}
BENCHMARK(BM_ForwardSequence);

}  // namespace

BENCHMARK_MAIN();
