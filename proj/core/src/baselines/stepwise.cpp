#include "cropyield/baselines/stepwise.hpp"

#include <algorithm>
#include <numeric>

#include "cropyield/metrics.hpp"

namespace cropyield {

double StepwiseResult::predict(std::span<const double> full_row) const {
  double acc = model.bias;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    if (selected[k] >= full_row.size()) throw ShapeError("StepwiseResult: row too short");
    acc += model.weights[k] * full_row[selected[k]];
  }
  return acc;
}

namespace {

double validation_rmse(const StepwiseResult& candidate, const Tensor64& val_x, std::span<const double> val_y) {
  const std::size_t d = val_x.dim(1);
  std::vector<double> pred;
  pred.reserve(val_y.size());
  for (std::size_t i = 0; i < val_y.size(); ++i) {
    pred.push_back(candidate.predict(std::span<const double>(val_x.data() + i * d, d)));
  }
  return rmse(pred, val_y);
}

}  // namespace

StepwiseResult stepwise_fit(const Tensor64& x, std::span<const double> y, const Tensor64& val_x,
                            std::span<const double> val_y) {
  if (val_y.empty()) throw InputError("stepwise_fit: validation set is empty");
  if (y.empty()) throw InputError("stepwise_fit: empty training data");
  if (x.rank() != 2 || x.dim(0) != y.size()) throw ShapeError("stepwise_fit: X must be [n x d] with one label per row");
  if (val_x.rank() != 2 || val_x.dim(0) != val_y.size() || val_x.dim(1) != x.dim(1)) {
    throw ShapeError("stepwise_fit: validation matrix does not match training features");
  }

  StepwiseResult best;
  best.model.bias = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  best.val_rmse = validation_rmse(best, val_x, val_y);

  const std::size_t d = x.dim(1);
  while (best.selected.size() < d) {
    StepwiseResult round_best;
    bool found = false;
    for (std::size_t f = 0; f < d; ++f) {
      if (std::find(best.selected.begin(), best.selected.end(), f) != best.selected.end()) continue;
      StepwiseResult candidate;
      candidate.selected = best.selected;
      candidate.selected.push_back(f);
      candidate.model = ridge_fit(select_columns(x, candidate.selected), y, 0.0);
      candidate.val_rmse = validation_rmse(candidate, val_x, val_y);
      if (!found || candidate.val_rmse < round_best.val_rmse) {
        round_best = std::move(candidate);
        found = true;
      }
    }
    if (!found || !(best.val_rmse - round_best.val_rmse > 1e-9)) break;
    best = std::move(round_best);
  }
  return best;
}

}  // namespace cropyield
