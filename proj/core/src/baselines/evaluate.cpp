#include "cropyield/baselines/evaluate.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "cropyield/baselines/linear.hpp"
#include "cropyield/baselines/stepwise.hpp"
#include "cropyield/baselines/tree.hpp"
#include "cropyield/metrics.hpp"
#include "cropyield/text.hpp"

namespace cropyield {

namespace {

constexpr std::array<std::string_view, 7> kColumns = {
    "Decision Forest (NDVI)",    "Decision Tree (NDVI)", "Step Regression (VCI)", "Ridge Regression (NDVI)",
    "LSTM + GP (Histogram)",     "CNN-LSTM-9",           "CNN-LSTM-12",
};

std::span<const double> row(const Tensor64& x, std::size_t i) {
  return std::span<const double>(x.data() + i * x.dim(1), x.dim(1));
}

template <class Predict>
std::vector<double> predict_rows(const FeatureTable& table, Predict&& predict) {
  std::vector<double> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) out.push_back(predict(row(table.x, i)));
  return out;
}

std::vector<int> years_of(std::span<const LabeledIndex> rows) {
  std::vector<int> years;
  for (const auto& r : rows) years.push_back(r.record.year);
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());
  return years;
}

}  // namespace

BaselineMethod parse_method(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kBaselineMethodNames); ++i) {
    if (name == kBaselineMethodNames[i]) return static_cast<BaselineMethod>(i);
  }
  throw InputError("unknown method '" + std::string(name) + "' (valid: ridge, tree, forest, stepwise)");
}

std::string_view method_name(BaselineMethod method) { return kBaselineMethodNames[static_cast<std::size_t>(method)]; }

std::string_view display_name(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::ridge: return kColumns[3];
    case BaselineMethod::tree: return kColumns[1];
    case BaselineMethod::forest: return kColumns[0];
    case BaselineMethod::stepwise: return kColumns[2];
  }
  throw InputError("unknown baseline method");
}

LabeledIndex labeled_ndvi(const Sample& sample, std::vector<std::string>* warnings) {
  IndexResult r = ndvi(sample.raster);
  if (warnings) warnings->insert(warnings->end(), r.warnings.begin(), r.warnings.end());
  r.features.region_id = sample.record.region_id;
  r.features.year = sample.record.year;
  return {sample.record, std::move(r.features)};
}

FeatureTable ndvi_table(std::span<const LabeledIndex> rows) {
  FeatureTable table;
  if (rows.empty()) return table;
  const std::size_t t = rows.front().ndvi.values.size();
  if (t == 0) throw InputError("ndvi_table: empty feature vectors");
  table.x = Tensor64({rows.size(), t});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].ndvi.values.size() != t) throw ShapeError("ndvi_table: feature vectors differ in length");
    std::copy(rows[i].ndvi.values.begin(), rows[i].ndvi.values.end(), table.x.data() + i * t);
    table.records.push_back(rows[i].record);
    table.y.push_back(rows[i].record.yield_kg_per_ha);
  }
  return table;
}

FeatureTable vci_table(std::span<const LabeledIndex> rows, std::span<const LabeledIndex> reference,
                       std::vector<std::string>* warnings) {
  std::map<std::string, std::map<int, FeatureVector>> by_region;
  for (const auto& r : reference) by_region[r.record.region_id][r.record.year] = r.ndvi;
  const std::vector<int> reference_years = years_of(reference);

  std::vector<LabeledIndex> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    auto history = by_region[r.record.region_id];
    history[r.record.year] = r.ndvi;
    std::vector<int> refs;
    for (int y : reference_years) {
      if (by_region[r.record.region_id].count(y)) refs.push_back(y);
    }
    if (refs.size() < 2) {
      throw InputError("vci: region " + r.record.region_id + " has fewer than two reference years");
    }
    IndexResult v = vci(history, r.record.year, refs);
    if (warnings) warnings->insert(warnings->end(), v.warnings.begin(), v.warnings.end());
    out.push_back({r.record, std::move(v.features)});
  }
  return ndvi_table(out);
}

BaselineOutcome evaluate_baseline(BaselineMethod method, std::span<const LabeledIndex> train,
                                  std::span<const LabeledIndex> val, std::span<const LabeledIndex> test,
                                  std::uint64_t seed) {
  if (test.empty()) throw InputError("evaluate_baseline: test set is empty");
  if (train.empty()) throw InputError("evaluate_baseline: training set is empty");
  if (val.empty()) throw InputError("evaluate_baseline: validation set is empty");

  BaselineOutcome outcome;
  outcome.method = method;
  FeatureTable tr, va, te;
  if (method == BaselineMethod::stepwise) {
    tr = vci_table(train, train, &outcome.warnings);
    va = vci_table(val, train, &outcome.warnings);
    te = vci_table(test, train, &outcome.warnings);
  } else {
    tr = ndvi_table(train);
    va = ndvi_table(val);
    te = ndvi_table(test);
  }
  if (tr.x.dim(1) != va.x.dim(1) || tr.x.dim(1) != te.x.dim(1)) {
    throw ShapeError("evaluate_baseline: splits have different sequence lengths");
  }

  // Tuning keeps the first candidate with the lowest validation RMSE.
  std::optional<double> best_val;
  std::vector<double> best_test;
  auto consider = [&](const std::string& label, auto&& predict) {
    const double v = rmse(predict_rows(va, predict), va.y);
    if (!best_val || v < *best_val) {
      best_val = v;
      outcome.chosen = label;
      best_test = predict_rows(te, predict);
    }
  };

  switch (method) {
    case BaselineMethod::ridge:
      for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const LinearModel m = ridge_fit(tr.x, tr.y, lambda);
        consider("lambda=" + format_double(lambda), [&](std::span<const double> x) { return m.predict(x); });
      }
      break;
    case BaselineMethod::tree:
      for (std::optional<std::size_t> depth : {std::optional<std::size_t>(3), std::optional<std::size_t>(5),
                                               std::optional<std::size_t>(8), std::optional<std::size_t>()}) {
        const RegressionTree t = tree_fit(tr.x, tr.y, TreeParams{depth, 1, std::nullopt});
        consider(depth ? "max_depth=" + std::to_string(*depth) : std::string("max_depth=unlimited"),
                 [&](std::span<const double> x) { return t.predict(x); });
      }
      break;
    case BaselineMethod::forest:
      for (std::size_t n_trees : {std::size_t{50}, std::size_t{200}}) {
        ForestParams p;
        p.n_trees = n_trees;
        const RandomForest f = forest_fit(tr.x, tr.y, p, seed);
        consider("n_trees=" + std::to_string(n_trees), [&](std::span<const double> x) { return f.predict(x); });
      }
      break;
    case BaselineMethod::stepwise: {
      const StepwiseResult s = stepwise_fit(tr.x, tr.y, va.x, va.y);
      std::string label = "selected=";
      for (std::size_t k = 0; k < s.selected.size(); ++k) label += (k ? ";" : "") + std::to_string(s.selected[k]);
      consider(label, [&](std::span<const double> x) { return s.predict(x); });
      break;
    }
  }

  outcome.val_rmse = *best_val;
  outcome.test_predictions = std::move(best_test);
  outcome.test_records = te.records;
  outcome.test_rmse = rmse(outcome.test_predictions, te.y);
  return outcome;
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "state,method,rmse_kg_per_ha\n";
  for (const auto& r : rows) out << r.state << ',' << r.method << ',' << format_double(r.rmse_kg_per_ha) << '\n';
}

std::vector<ResultRow> read_results_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<ResultRow> rows;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t(trim(line));
    if (t.empty()) continue;
    if (header) {
      if (t != "state,method,rmse_kg_per_ha") throw ParseError(source, line_no, "unexpected header '" + t + "'");
      header = false;
      continue;
    }
    const auto fields = split(t, ',');
    if (fields.size() != 3) throw ParseError(source, line_no, "expected 3 fields");
    const auto value = parse_double(trim(fields[2]));
    if (!value) throw ParseError(source, line_no, "invalid rmse '" + fields[2] + "'");
    rows.push_back({std::string(trim(fields[0])), std::string(trim(fields[1])), *value});
  }
  if (header) throw ParseError(source, line_no, "missing header");
  return rows;
}

std::span<const std::string_view> results_table_columns() { return kColumns; }

std::string render_results_table(std::span<const ResultRow> rows) {
  std::vector<std::string> states;
  std::vector<std::string> columns(kColumns.begin(), kColumns.end());
  std::map<std::pair<std::string, std::string>, double> cells;
  for (const auto& r : rows) {
    if (std::find(states.begin(), states.end(), r.state) == states.end()) states.push_back(r.state);
    if (std::find(columns.begin(), columns.end(), r.method) == columns.end()) columns.push_back(r.method);
    cells[{r.state, r.method}] = r.rmse_kg_per_ha;
  }
  std::ostringstream out;
  out << "State";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (const auto& s : states) {
    out << s;
    for (const auto& c : columns) {
      out << ',';
      if (auto it = cells.find({s, c}); it != cells.end()) out << format_double(it->second);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cropyield
