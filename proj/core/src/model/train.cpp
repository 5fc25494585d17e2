#include "cropyield/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "cropyield/model/checkpoint.hpp"

namespace cropyield {

AdamOptimizer::AdamOptimizer(const ModelParams<float>& like, AdamConfig config)
    : config_(config), m_(zeros_like(like)), v_(zeros_like(like)) {
  if (!(config.step_size > 0.0)) throw InputError("Adam step size must be positive");
}

void AdamOptimizer::step(ModelParams<float>& params, const ModelParams<float>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const float b1 = static_cast<float>(config_.beta1), b2 = static_cast<float>(config_.beta2);

  std::vector<Tensor*> p, m, v;
  std::vector<const Tensor*> g;
  params.visit([&p](Tensor& t) { p.push_back(&t); });
  m_.visit([&m](Tensor& t) { m.push_back(&t); });
  v_.visit([&v](Tensor& t) { v.push_back(&t); });
  grads.visit([&g](const Tensor& t) { g.push_back(&t); });
  if (g.size() != p.size()) throw ShapeError("Adam: gradient structure does not match parameters");

  for (std::size_t k = 0; k < p.size(); ++k) {
    require_same_shape(*p[k], *g[k], "Adam step");
    for (std::size_t i = 0; i < p[k]->size(); ++i) {
      const float gi = (*g[k])[i];
      float& mi = (*m[k])[i];
      float& vi = (*v[k])[i];
      mi = b1 * mi + (1.0f - b1) * gi;
      vi = b2 * vi + (1.0f - b2) * gi * gi;
      const double mhat = mi / c1;
      const double vhat = vi / c2;
      (*p[k])[i] -= static_cast<float>(config_.step_size * mhat / (std::sqrt(vhat) + config_.epsilon));
    }
  }
}

double global_norm(const ModelParams<float>& grads) {
  double sq = 0.0;
  grads.visit([&sq](const Tensor& t) {
    for (float v : t.values()) sq += static_cast<double>(v) * v;
  });
  return std::sqrt(sq);
}

double clip_global_norm(ModelParams<float>& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) {
    const auto factor = static_cast<float>(max_norm / norm);
    grads.visit([factor](Tensor& t) {
      for (float& v : t.values()) v *= factor;
    });
  }
  return norm;
}

namespace {

std::vector<const TrainSample*> sorted_by_id(std::span<const TrainSample* const> batch) {
  std::vector<const TrainSample*> order(batch.begin(), batch.end());
  std::stable_sort(order.begin(), order.end(), [](const TrainSample* a, const TrainSample* b) { return a->id < b->id; });
  return order;
}

}  // namespace

BatchGradient batch_loss_and_gradient(const ModelParams<float>& params, std::span<const TrainSample* const> batch,
                                      RunMode mode, std::uint64_t seed, std::size_t epoch) {
  BatchGradient out{0.0, zeros_like(params)};
  const double label_std = params.label_std;
  const SeededRng epoch_stream = SeededRng(seed).derive("dropout").derive(static_cast<std::uint64_t>(epoch));
  for (const TrainSample* sample : sorted_by_id(batch)) {
    SeededRng rng = epoch_stream.derive(sample->id);
    ForwardCache<float> cache;
    const Tensor raw = forward_raw(params, sample->sequence, mode, &rng, &cache);
    const double target = (sample->label - params.label_mean) / label_std;
    out.loss += loss_sequence(raw, target);
    const ModelParams<float> g = backward(params, cache, loss_sequence_gradient(raw, target));
    std::vector<Tensor*> dst;
    out.grads.visit([&dst](Tensor& t) { dst.push_back(&t); });
    std::size_t k = 0;
    g.visit([&](const Tensor& t) { add_into(*dst[k++], t); });
  }
  return out;
}

double prediction_rmse(const ModelParams<float>& params, std::span<const TrainSample> samples) {
  if (samples.empty()) throw InputError("prediction_rmse: no samples");
  std::vector<const TrainSample*> order;
  for (const auto& s : samples) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const TrainSample* a, const TrainSample* b) { return a->id < b->id; });
  double sq = 0.0;
  for (const auto* s : order) {
    const double r = predict_full(params, s->sequence) - s->label;
    sq += r * r;
  }
  return std::sqrt(sq / static_cast<double>(order.size()));
}

TrainResult train(const ModelParams<float>& initial, std::span<const TrainSample> train_set,
                  std::span<const TrainSample> val_set, const TrainConfig& config) {
  if (train_set.empty()) throw InputError("train: empty training set");
  if (config.batch_size == 0) throw InputError("train: batch size must be at least 1");

  TrainResult result{initial, {}, 0, std::numeric_limits<double>::infinity()};
  if (config.epochs == 0) return result;

  ModelParams<float> params = initial;
  double mean = 0.0;
  for (const auto& s : train_set) mean += s.label;
  mean /= static_cast<double>(train_set.size());
  double var = 0.0;
  for (const auto& s : train_set) var += (s.label - mean) * (s.label - mean);
  const double sd = std::sqrt(var / static_cast<double>(train_set.size()));
  params.label_mean = static_cast<float>(mean);
  params.label_std = static_cast<float>(sd > 1e-12 ? sd : 1.0);
  result.best = params;

  const std::span<const TrainSample> monitor = val_set.empty() ? train_set : val_set;
  AdamOptimizer adam(params, config.adam);
  const double label_scale_sq = static_cast<double>(params.label_std) * params.label_std;

  std::vector<const TrainSample*> order;
  for (const auto& s : train_set) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const TrainSample* a, const TrainSample* b) { return a->id < b->id; });

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    SeededRng shuffle = SeededRng(config.seed).derive("shuffle").derive(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.uniform_index(i)]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const TrainSample* const> batch(order.data() + start, end - start);
      BatchGradient bg = batch_loss_and_gradient(params, batch, RunMode::train, config.seed, epoch);
      if (!std::isfinite(bg.loss)) throw DivergenceError(epoch, "non-finite loss");
      const double norm = clip_global_norm(bg.grads, config.clip_norm);
      if (!std::isfinite(norm)) throw DivergenceError(epoch, "non-finite gradient");
      adam.step(params, bg.grads);
      epoch_loss += bg.loss;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss * label_scale_sq / static_cast<double>(order.size());
    rec.val_rmse = prediction_rmse(params, monitor);
    if (!std::isfinite(rec.val_rmse)) throw DivergenceError(epoch, "non-finite validation RMSE");
    result.history.push_back(rec);
    if (rec.val_rmse < result.best_val_rmse) {
      result.best_val_rmse = rec.val_rmse;
      result.best_epoch = epoch;
      result.best = params;
      if (!config.checkpoint_path.empty()) save_params(result.best, config.checkpoint_path);
    }
  }
  return result;
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
  const auto old_precision = out.precision(17);
  out << "epoch,train_loss,val_rmse\n";
  for (const auto& r : history) out << r.epoch << ',' << r.train_loss << ',' << r.val_rmse << '\n';
  out.precision(old_precision);
}

}  // namespace cropyield
