#include "cropyield/baselines/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cropyield {

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) throw StateError("RegressionTree: not fitted");
  std::size_t at = 0;
  while (!nodes[at].is_leaf()) {
    const auto& n = nodes[at];
    if (static_cast<std::size_t>(n.feature) >= x.size()) throw ShapeError("RegressionTree: feature index out of range");
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[at].value;
}

std::size_t RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    const auto [at, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[at].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes[at].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[at].right), d + 1);
    }
  }
  return deepest;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Tensor64& x, std::span<const double> y, const TreeParams& params, SeededRng* rng)
      : x_(x), y_(y), params_(params), rng_(rng), d_(x.dim(1)) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    RegressionTree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  double feature(std::size_t row, std::size_t f) const { return x_[row * d_ + f]; }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> all(d_);
    std::iota(all.begin(), all.end(), 0);
    if (!params_.max_features || *params_.max_features >= d_) return all;
    if (!rng_) throw StateError("tree_fit: feature subsampling needs a generator");
    const std::size_t m = std::max<std::size_t>(1, *params_.max_features);
    for (std::size_t i = 0; i < m; ++i) std::swap(all[i], all[i + rng_->uniform_index(d_ - i)]);
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(const std::vector<std::size_t>& rows, double node_sse) {
    Split best;
    const std::size_t n = rows.size();
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_leaf);
    if (n < 2 * min_leaf) return best;
    double total = 0.0;
    for (auto r : rows) total += y_[r];

    std::vector<std::size_t> order = rows;
    for (std::size_t f : candidate_features()) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return feature(a, f) < feature(b, f); });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += y_[order[i]];
        const std::size_t n_left = i + 1, n_right = n - n_left;
        const double v = feature(order[i], f), next = feature(order[i + 1], f);
        if (!(v < next) || n_left < min_leaf || n_right < min_leaf) continue;
        const double mean_left = left_sum / static_cast<double>(n_left);
        const double mean_right = (total - left_sum) / static_cast<double>(n_right);
        const double diff = mean_left - mean_right;
        const double gain = static_cast<double>(n_left) * static_cast<double>(n_right) / static_cast<double>(n) * diff * diff;
        if (gain > best.gain) best = {static_cast<int>(f), 0.5 * (v + next), gain};
      }
    }
    if (best.feature >= 0 && !(best.gain > 1e-12 * node_sse)) best.feature = -1;
    return best;
  }

  std::size_t grow(RegressionTree& tree, std::vector<std::size_t> rows, std::size_t depth) {
    const std::size_t id = tree.nodes.size();
    tree.nodes.emplace_back();
    double mean = 0.0;
    for (auto r : rows) mean += y_[r];
    mean /= static_cast<double>(rows.size());
    double sse = 0.0;
    for (auto r : rows) sse += (y_[r] - mean) * (y_[r] - mean);
    tree.nodes[id].value = mean;
    tree.nodes[id].samples = rows.size();

    const bool depth_left = !params_.max_depth || depth < *params_.max_depth;
    const bool pure = sse <= 1e-24 * static_cast<double>(rows.size()) * (1.0 + mean * mean);
    if (!depth_left || pure) return id;

    const Split split = best_split(rows, sse);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (feature(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
    }
    tree.nodes[id].feature = split.feature;
    tree.nodes[id].threshold = split.threshold;
    const std::size_t l = grow(tree, std::move(left), depth + 1);
    const std::size_t r = grow(tree, std::move(right), depth + 1);
    tree.nodes[id].left = static_cast<int>(l);
    tree.nodes[id].right = static_cast<int>(r);
    return id;
  }

  const Tensor64& x_;
  std::span<const double> y_;
  TreeParams params_;
  SeededRng* rng_;
  std::size_t d_;
};

void check_data(const Tensor64& x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw InputError("tree_fit: empty data");
  if (x.rank() != 2 || x.dim(0) != y.size()) throw ShapeError("tree_fit: X must be [n x d] with one label per row");
}

}  // namespace

RegressionTree tree_fit_rows(const Tensor64& x, std::span<const double> y, std::vector<std::size_t> rows,
                             const TreeParams& params, SeededRng* rng) {
  check_data(x, y);
  if (rows.empty()) throw InputError("tree_fit: empty data");
  if (rows.size() < params.min_leaf) throw InputError("tree_fit: fewer rows than min_leaf");
  return TreeBuilder(x, y, params, rng).build(std::move(rows));
}

RegressionTree tree_fit(const Tensor64& x, std::span<const double> y, const TreeParams& params, SeededRng* rng) {
  check_data(x, y);
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  return tree_fit_rows(x, y, std::move(rows), params, rng);
}

double RandomForest::predict(std::span<const double> x) const {
  if (trees.empty()) throw StateError("RandomForest: not fitted");
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

RandomForest forest_fit(const Tensor64& x, std::span<const double> y, const ForestParams& params, std::uint64_t seed) {
  check_data(x, y);
  if (params.n_trees == 0) throw InputError("forest_fit: n_trees must be at least 1");
  TreeParams tree_params = params.tree;
  if (params.subsample_features) {
    tree_params.max_features =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.dim(1))))));
  }
  const SeededRng root(seed);
  RandomForest forest;
  const std::size_t n = y.size();
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    SeededRng rng = root.derive(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = rng.uniform_index(n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    forest.trees.push_back(tree_fit_rows(x, y, std::move(rows), tree_params, &rng));
  }
  return forest;
}

}  // namespace cropyield
