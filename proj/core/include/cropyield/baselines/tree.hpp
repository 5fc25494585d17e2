#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cropyield/rng.hpp"
#include "cropyield/tensor.hpp"

namespace cropyield {

// Either a split (feature >= 0) or a leaf holding the mean training label.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::size_t samples = 0;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct TreeParams {
  std::optional<std::size_t> max_depth;      // nullopt: unlimited
  std::size_t min_leaf = 1;
  std::optional<std::size_t> max_features;   // per-split feature subsample; nullopt: all
};

/// Greedy variance-reduction regression tree. Candidate thresholds are the
/// midpoints between consecutive distinct sorted feature values. Among equal
/// gains the lowest feature index wins, then the lowest threshold.
class RegressionTree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

// `rng` is only consulted when params.max_features subsamples features.
RegressionTree tree_fit(const Tensor64& x, std::span<const double> y, const TreeParams& params,
                        SeededRng* rng = nullptr);

// Same as tree_fit over the given row indices (duplicates allowed, as in a bootstrap sample).
RegressionTree tree_fit_rows(const Tensor64& x, std::span<const double> y, std::vector<std::size_t> rows,
                             const TreeParams& params, SeededRng* rng = nullptr);

inline double tree_predict(const RegressionTree& tree, std::span<const double> x) { return tree.predict(x); }

struct ForestParams {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  TreeParams tree{std::nullopt, 1, std::nullopt};
  bool subsample_features = true;  // sqrt(d) features per split when set
};

class RandomForest {
 public:
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const;
};

RandomForest forest_fit(const Tensor64& x, std::span<const double> y, const ForestParams& params, std::uint64_t seed);

}  // namespace cropyield
