#pragma once

#include <cmath>
#include <span>

#include "cropyield/errors.hpp"

namespace cropyield {

// sqrt(mean((predicted - actual)^2)), accumulated in index order.
inline double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw ShapeError("rmse: prediction and label counts differ");
  if (predicted.empty()) throw InputError("rmse: empty set");
  double sq = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double r = predicted[i] - actual[i];
    sq += r * r;
  }
  return std::sqrt(sq / static_cast<double>(predicted.size()));
}

}  // namespace cropyield
