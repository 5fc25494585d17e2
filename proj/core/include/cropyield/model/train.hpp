#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cropyield/model/network.hpp"
#include "cropyield/model/params.hpp"

namespace cropyield {

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t epochs = 50;
  std::size_t batch_size = 4;
  std::uint64_t seed = 0;
  double clip_norm = 5.0;                  // global gradient norm; <= 0 disables clipping
  std::filesystem::path checkpoint_path;   // best checkpoint is rewritten here when non-empty
};

/// One model-ready sample: a normalized [T x H x W x B] sequence and its
/// yield label in kg/hectare.
struct TrainSample {
  std::string id;
  Tensor sequence;
  double label = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per-sample sequence loss, (kg/ha)^2
  double val_rmse = 0.0;    // kg/ha
};

struct TrainResult {
  ModelParams<float> best;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  double best_val_rmse = 0.0;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const ModelParams<float>& like, AdamConfig config);

  void step(ModelParams<float>& params, const ModelParams<float>& grads);

  std::size_t steps_taken() const noexcept { return t_; }

 private:
  AdamConfig config_;
  ModelParams<float> m_;
  ModelParams<float> v_;
  std::size_t t_ = 0;
};

double global_norm(const ModelParams<float>& grads);

// Scales `grads` in place so their global norm is at most max_norm. Returns
// the norm before clipping.
double clip_global_norm(ModelParams<float>& grads, double max_norm);

struct BatchGradient {
  double loss = 0.0;  // summed sequence loss in standardized label units
  ModelParams<float> grads;
};

/// Summed loss and gradient over a batch. Samples are processed in sorted id
/// order, so the result does not depend on the order they are given in. In
/// train mode each sample's dropout stream is derived from (seed, epoch, id).
BatchGradient batch_loss_and_gradient(const ModelParams<float>& params, std::span<const TrainSample* const> batch,
                                      RunMode mode, std::uint64_t seed, std::size_t epoch);

// RMSE in kg/ha of predict_full over `samples`, accumulated in id order.
double prediction_rmse(const ModelParams<float>& params, std::span<const TrainSample> samples);

/// Minibatch Adam on the per-step squared loss, labels standardized over the
/// training set. Returns the parameters with the lowest validation RMSE (or
/// training RMSE when `val` is empty) and the per-epoch history.
TrainResult train(const ModelParams<float>& initial, std::span<const TrainSample> train_set,
                  std::span<const TrainSample> val_set, const TrainConfig& config);

// CSV `epoch,train_loss,val_rmse`.
void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

}  // namespace cropyield
