#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cropyield/errors.hpp"
#include "cropyield/tensor.hpp"

namespace cropyield {

using ScalarFunction = std::function<double(const Tensor64&)>;

/// Maximum relative error between an analytic gradient and central finite
/// differences of `f` at `x`:
///
///   max_i |fd_i - an_i| / max(|fd_i|, |an_i|, 1e-8),
///   fd_i = (f(x + h e_i) - f(x - h e_i)) / (2h).
///
/// Runs in double precision, one coordinate at a time.
inline double gradient_check(const ScalarFunction& f, const Tensor64& x, const Tensor64& analytic_grad,
                             double h = 1e-5) {
  if (x.shape() != analytic_grad.shape()) {
    throw ShapeError("gradient_check: point " + to_string(x.shape()) + " vs gradient " +
                     to_string(analytic_grad.shape()));
  }
  auto eval = [&f](const Tensor64& at, std::size_t i) {
    const double v = f(at);
    if (!std::isfinite(v)) {
      throw EvaluationError("gradient_check: non-finite function value while perturbing coordinate " +
                            std::to_string(i));
    }
    return v;
  };

  Tensor64 probe = x;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double plus = eval(probe, i);
    probe[i] = orig - h;
    const double minus = eval(probe, i);
    probe[i] = orig;

    const double fd = (plus - minus) / (2.0 * h);
    const double an = analytic_grad[i];
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
    worst = std::max(worst, std::abs(fd - an) / denom);
  }
  return worst;
}

}  // namespace cropyield
