#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cropyield/baselines/indices.hpp"
#include "cropyield/data/dataset.hpp"
#include "cropyield/tensor.hpp"

namespace cropyield {

enum class BaselineMethod { ridge, tree, forest, stepwise };

inline constexpr std::string_view kBaselineMethodNames[] = {"ridge", "tree", "forest", "stepwise"};

// Throws InputError listing the valid names.
BaselineMethod parse_method(std::string_view name);
std::string_view method_name(BaselineMethod method);
// Column label in the results table, e.g. "Ridge Regression (NDVI)".
std::string_view display_name(BaselineMethod method);

// A labelled region-year with its NDVI series.
struct LabeledIndex {
  RegionRecord record;
  FeatureVector ndvi;
};

LabeledIndex labeled_ndvi(const Sample& sample, std::vector<std::string>* warnings = nullptr);

struct FeatureTable {
  std::vector<RegionRecord> records;
  Tensor64 x;  // [n x T]
  std::vector<double> y;

  std::size_t size() const { return records.size(); }
};

FeatureTable ndvi_table(std::span<const LabeledIndex> rows);

/// VCI rows for `rows`, each against the NDVI envelope of the same region
/// over `reference`. A region without at least two reference years is an
/// input error.
FeatureTable vci_table(std::span<const LabeledIndex> rows, std::span<const LabeledIndex> reference,
                       std::vector<std::string>* warnings = nullptr);

struct BaselineOutcome {
  BaselineMethod method = BaselineMethod::ridge;
  std::string chosen;  // selected hyper-parameters, e.g. "lambda=0.1"
  double val_rmse = 0.0;
  double test_rmse = 0.0;
  std::vector<RegionRecord> test_records;
  std::vector<double> test_predictions;
  std::vector<std::string> warnings;
};

/// Fits every grid candidate on `train`, keeps the one with the lowest
/// validation RMSE (first on ties) and reports its RMSE on `test`.
/// Ridge, tree and forest use NDVI features; stepwise uses VCI with the
/// training years as reference.
BaselineOutcome evaluate_baseline(BaselineMethod method, std::span<const LabeledIndex> train,
                                  std::span<const LabeledIndex> val, std::span<const LabeledIndex> test,
                                  std::uint64_t seed);

struct ResultRow {
  std::string state;
  std::string method;  // display name
  double rmse_kg_per_ha = 0.0;

  bool operator==(const ResultRow&) const = default;
};

// `state,method,rmse_kg_per_ha`
void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
std::vector<ResultRow> read_results_csv(std::istream& in, const std::string& source = "<results>");

// Column order of the wide results table.
std::span<const std::string_view> results_table_columns();

/// Wide table, one row per state in order of first appearance, one column
/// per method in canonical order; missing cells are left empty. Methods
/// outside the canonical list are appended in order of first appearance.
std::string render_results_table(std::span<const ResultRow> rows);

}  // namespace cropyield
