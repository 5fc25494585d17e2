#pragma once

#include <span>
#include <vector>

#include "cropyield/tensor.hpp"

namespace cropyield {

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  bool singular = false;  // solved through the pseudo-inverse

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const Tensor64& rows) const;
};

/// Closed-form ridge regression, min |Xw + b - y|^2 + lambda |w|^2, with an
/// unpenalized bias (X and y are centered before solving). A singular
/// system at lambda = 0 falls back to the minimum-norm solution and sets
/// `singular`.
LinearModel ridge_fit(const Tensor64& x, std::span<const double> y, double lambda);

// Selected columns of an [n x d] matrix, in the given order.
Tensor64 select_columns(const Tensor64& x, std::span<const std::size_t> columns);

}  // namespace cropyield
