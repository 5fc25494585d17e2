#include "cropyield/baselines/linear.hpp"

#include <Eigen/Dense>

namespace cropyield {

double LinearModel::predict(std::span<const double> x) const {
  if (x.size() != weights.size()) throw ShapeError("LinearModel: feature count mismatch");
  double acc = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) acc += weights[j] * x[j];
  return acc;
}

std::vector<double> LinearModel::predict(const Tensor64& rows) const {
  if (rows.rank() != 2) throw ShapeError("LinearModel: expected [n x d] rows");
  std::vector<double> out;
  for (std::size_t i = 0; i < rows.dim(0); ++i) {
    out.push_back(predict(std::span<const double>(rows.data() + i * rows.dim(1), rows.dim(1))));
  }
  return out;
}

LinearModel ridge_fit(const Tensor64& x, std::span<const double> y, double lambda) {
  if (x.rank() != 2) throw ShapeError("ridge_fit: X must be [n x d], got " + to_string(x.shape()));
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (n == 0 || y.size() != n) throw InputError("ridge_fit: need one label per row");
  if (lambda < 0.0) throw InputError("ridge_fit: lambda must be non-negative");

  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> xm(x.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(n));

  const Eigen::RowVectorXd x_mean = xm.colwise().mean();
  const double y_mean = ym.mean();
  const Eigen::MatrixXd xc = xm.rowwise() - x_mean;
  const Eigen::VectorXd yc = ym.array() - y_mean;

  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = xc.transpose() * yc;

  LinearModel model;
  Eigen::VectorXd w;
  if (d == 0) {
    w.resize(0);
  } else if (lambda > 0.0) {
    w = gram.ldlt().solve(rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
    model.singular = cod.rank() < static_cast<Eigen::Index>(d);
    w = cod.solve(rhs);
  }
  model.weights.assign(w.data(), w.data() + w.size());
  model.bias = y_mean - (d ? x_mean.dot(w) : 0.0);
  return model;
}

Tensor64 select_columns(const Tensor64& x, std::span<const std::size_t> columns) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (columns.empty()) return {};
  Tensor64 out({n, columns.size()});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k] >= d) throw ShapeError("select_columns: column out of range");
      out[i * columns.size() + k] = x[i * d + columns[k]];
    }
  }
  return out;
}

}  // namespace cropyield
