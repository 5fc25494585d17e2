#pragma once

#include <span>
#include <vector>

#include "cropyield/baselines/linear.hpp"

namespace cropyield {

struct StepwiseResult {
  std::vector<std::size_t> selected;  // in order of inclusion
  LinearModel model;                  // weights follow `selected`
  double val_rmse = 0.0;

  double predict(std::span<const double> full_row) const;
};

/// Forward selection by validation RMSE. Each candidate set is refit by
/// ordinary least squares on the training data; a feature is added only if
/// it lowers validation RMSE by more than 1e-9. Equal improvements go to the
/// lowest feature index. An empty selection is the bias-only model.
StepwiseResult stepwise_fit(const Tensor64& x, std::span<const double> y, const Tensor64& val_x,
                            std::span<const double> val_y);

}  // namespace cropyield
