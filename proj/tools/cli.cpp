#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "cropyield/analysis/evaluation.hpp"
#include "cropyield/analysis/pipeline.hpp"
#include "cropyield/baselines/evaluate.hpp"
#include "cropyield/data/dataset.hpp"
#include "cropyield/data/synthetic.hpp"
#include "cropyield/model/checkpoint.hpp"
#include "cropyield/model/train.hpp"
#include "cropyield/text.hpp"

namespace cropyield::cli {

namespace fs = std::filesystem;

namespace {

// Model-shape settings a run may override; unset fields keep the base value.
struct ModelOverrides {
  std::optional<std::size_t> bands, timesteps, image_size, input_height, input_width, conv_layers, conv_filters,
      kernel, stride, lstm_layers, lstm_hidden, head_hidden1, head_hidden2;
  std::optional<double> dropout_keep, leaky_slope;

  bool any() const {
    return bands || timesteps || image_size || input_height || input_width || conv_layers || conv_filters || kernel ||
           stride || lstm_layers || lstm_hidden || head_hidden1 || head_hidden2 || dropout_keep || leaky_slope;
  }

  void apply(ModelConfig& c) const {
    if (image_size) c.input_height = c.input_width = *image_size;
    if (input_height) c.input_height = *input_height;
    if (input_width) c.input_width = *input_width;
    if (bands) c.bands = *bands;
    if (timesteps) c.timesteps = *timesteps;
    if (conv_layers) c.conv_layers = *conv_layers;
    if (conv_filters) c.conv_filters = *conv_filters;
    if (kernel) c.kernel = *kernel;
    if (stride) c.stride = *stride;
    if (lstm_layers) c.lstm_layers = *lstm_layers;
    if (lstm_hidden) c.lstm_hidden = *lstm_hidden;
    if (head_hidden1) c.head_hidden1 = *head_hidden1;
    if (head_hidden2) c.head_hidden2 = *head_hidden2;
    if (dropout_keep) c.dropout_keep = static_cast<float>(*dropout_keep);
    if (leaky_slope) c.leaky_slope = static_cast<float>(*leaky_slope);
  }
};

// Everything a subcommand may read. Layered: defaults, then config file, then flags.
struct Settings {
  std::optional<std::string> manifest, labels, raster_dir, out, checkpoint, spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size, n_draws;
  std::optional<double> learning_rate, clip_norm;
  std::optional<std::string> method, state, train_state, train_years;
  std::optional<int> val_year, test_year;
  ModelOverrides model;
};

template <class T>
void overlay(std::optional<T>& base, const std::optional<T>& top) {
  if (top) base = top;
}

void overlay(Settings& base, const Settings& top) {
  overlay(base.manifest, top.manifest);
  overlay(base.labels, top.labels);
  overlay(base.raster_dir, top.raster_dir);
  overlay(base.out, top.out);
  overlay(base.checkpoint, top.checkpoint);
  overlay(base.spec, top.spec);
  overlay(base.seed, top.seed);
  overlay(base.epochs, top.epochs);
  overlay(base.batch_size, top.batch_size);
  overlay(base.n_draws, top.n_draws);
  overlay(base.learning_rate, top.learning_rate);
  overlay(base.clip_norm, top.clip_norm);
  overlay(base.method, top.method);
  overlay(base.state, top.state);
  overlay(base.train_state, top.train_state);
  overlay(base.train_years, top.train_years);
  overlay(base.val_year, top.val_year);
  overlay(base.test_year, top.test_year);
  auto& m = base.model;
  const auto& t = top.model;
  overlay(m.bands, t.bands);
  overlay(m.timesteps, t.timesteps);
  overlay(m.image_size, t.image_size);
  overlay(m.input_height, t.input_height);
  overlay(m.input_width, t.input_width);
  overlay(m.conv_layers, t.conv_layers);
  overlay(m.conv_filters, t.conv_filters);
  overlay(m.kernel, t.kernel);
  overlay(m.stride, t.stride);
  overlay(m.lstm_layers, t.lstm_layers);
  overlay(m.lstm_hidden, t.lstm_hidden);
  overlay(m.head_hidden1, t.head_hidden1);
  overlay(m.head_hidden2, t.head_hidden2);
  overlay(m.dropout_keep, t.dropout_keep);
  overlay(m.leaky_slope, t.leaky_slope);
}

Settings read_config_file(const fs::path& path) {
  const KeyValueFile file = KeyValueFile::load(path);
  static constexpr std::string_view kKnown[] = {
      "manifest",     "labels",       "raster_dir",   "out",         "checkpoint",   "spec",
      "seed",         "epochs",       "batch_size",   "n_draws",     "learning_rate", "clip_norm",
      "method",       "state",        "train_state",  "train_years", "val_year",     "test_year",
      "bands",        "timesteps",    "image_size",   "input_height", "input_width", "conv_layers",
      "conv_filters", "kernel",       "stride",       "lstm_layers", "lstm_hidden",  "head_hidden1",
      "head_hidden2", "dropout_keep", "leaky_slope"};
  file.require_known(kKnown);

  auto count = [&file](std::string_view key) -> std::optional<std::size_t> {
    const auto v = file.get_int(key);
    if (!v) return std::nullopt;
    if (*v < 0) throw ParseError(file.source(), file.find(key)->line, std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(*v);
  };
  Settings s;
  s.manifest = file.get_string("manifest");
  s.labels = file.get_string("labels");
  s.raster_dir = file.get_string("raster_dir");
  s.out = file.get_string("out");
  s.checkpoint = file.get_string("checkpoint");
  s.spec = file.get_string("spec");
  if (auto v = count("seed")) s.seed = *v;
  s.epochs = count("epochs");
  s.batch_size = count("batch_size");
  s.n_draws = count("n_draws");
  s.learning_rate = file.get_double("learning_rate");
  s.clip_norm = file.get_double("clip_norm");
  s.method = file.get_string("method");
  s.state = file.get_string("state");
  s.train_state = file.get_string("train_state");
  s.train_years = file.get_string("train_years");
  if (auto v = file.get_int("val_year")) s.val_year = static_cast<int>(*v);
  if (auto v = file.get_int("test_year")) s.test_year = static_cast<int>(*v);
  s.model.bands = count("bands");
  s.model.timesteps = count("timesteps");
  s.model.image_size = count("image_size");
  s.model.input_height = count("input_height");
  s.model.input_width = count("input_width");
  s.model.conv_layers = count("conv_layers");
  s.model.conv_filters = count("conv_filters");
  s.model.kernel = count("kernel");
  s.model.stride = count("stride");
  s.model.lstm_layers = count("lstm_layers");
  s.model.lstm_hidden = count("lstm_hidden");
  s.model.head_hidden1 = count("head_hidden1");
  s.model.head_hidden2 = count("head_hidden2");
  s.model.dropout_keep = file.get_double("dropout_keep");
  s.model.leaky_slope = file.get_double("leaky_slope");
  return s;
}

// Resolved values shared by all subcommands.
struct Run {
  std::string subcommand;
  Settings settings;
  fs::path out;
  std::uint64_t seed = 0;
  YearSplit split;
  std::ostream* log = nullptr;

  std::string require(const std::optional<std::string>& v, const char* flag) const {
    if (!v || v->empty()) throw InputError(subcommand + ": " + flag + " is required");
    return *v;
  }
};

Run resolve(const std::string& subcommand, const std::optional<std::string>& config_path, const Settings& flags) {
  Run run;
  run.subcommand = subcommand;
  if (config_path) overlay(run.settings, read_config_file(*config_path));
  overlay(run.settings, flags);
  const Settings& s = run.settings;
  run.out = s.out.value_or("out");
  run.seed = s.seed.value_or(0);
  if (s.train_years) run.split.train_years = parse_year_list(*s.train_years);
  if (s.val_year) run.split.val_year = *s.val_year;
  if (s.test_year) run.split.test_year = *s.test_year;
  if (s.model.bands && *s.model.bands != 9 && *s.model.bands != 12) {
    throw InputError("--bands must be 9 or 12");
  }
  return run;
}

std::string join_years(const std::vector<int>& years) {
  std::string s;
  for (std::size_t i = 0; i < years.size(); ++i) s += (i ? "," : "") + std::to_string(years[i]);
  return s;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write " + path.string());
  return f;
}

void prepare_out_dir(const Run& run) {
  std::error_code ec;
  fs::create_directories(run.out, ec);
  if (ec || !fs::is_directory(run.out)) throw InputError("cannot create output directory " + run.out.string());
}

// The resolved configuration, without timestamps or the output directory itself.
void write_run_meta(const Run& run, const std::optional<ModelConfig>& model, const std::optional<TrainConfig>& train,
                    const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  const Settings& s = run.settings;
  std::ostringstream meta;
  meta << "subcommand = " << run.subcommand << "\n";
  meta << "seed = " << run.seed << "\n";
  auto opt = [&meta](const char* key, const std::optional<std::string>& v) {
    if (v) meta << key << " = " << *v << "\n";
  };
  opt("manifest", s.manifest);
  opt("labels", s.labels);
  opt("raster_dir", s.raster_dir);
  opt("checkpoint", s.checkpoint);
  opt("spec", s.spec);
  opt("state", s.state);
  opt("method", s.method);
  meta << "train_years = " << join_years(run.split.train_years) << "\n";
  meta << "val_year = " << run.split.val_year << "\n";
  meta << "test_year = " << run.split.test_year << "\n";
  if (model) meta << describe(*model);
  if (train) {
    meta << "epochs = " << train->epochs << "\n"
         << "batch_size = " << train->batch_size << "\n"
         << "learning_rate = " << format_double(train->adam.step_size) << "\n"
         << "beta1 = " << format_double(train->adam.beta1) << "\n"
         << "beta2 = " << format_double(train->adam.beta2) << "\n"
         << "epsilon = " << format_double(train->adam.epsilon) << "\n"
         << "clip_norm = " << format_double(train->clip_norm) << "\n";
  }
  for (const auto& [k, v] : extra) meta << k << " = " << v << "\n";
  auto f = open_output(run.out / "run.meta");
  f << meta.str();
}

DatasetManifest load_dataset(const Run& run) {
  const fs::path manifest = run.require(run.settings.manifest, "--manifest");
  const fs::path labels = run.settings.labels ? fs::path(*run.settings.labels) : manifest.parent_path() / "labels.csv";
  const fs::path raster_dir = run.settings.raster_dir ? fs::path(*run.settings.raster_dir) : fs::path();
  DatasetManifest m = load_manifest(manifest, labels, raster_dir);
  m = filter_state(m, run.settings.state.value_or(""));
  sort_entries(m);
  return m;
}

// Loads params and checks them against any model settings given for this run.
ModelParams<float> load_checkpoint(const Run& run) {
  const fs::path path = run.require(run.settings.checkpoint, "--checkpoint");
  ModelParams<float> params = load_params(path);
  if (run.settings.model.any()) {
    ModelConfig expected = params.config;
    run.settings.model.apply(expected);
    const std::string field = first_difference(expected, params.config);
    if (!field.empty()) {
      throw ConfigMismatchError("checkpoint " + path.string() + " was written for a different " + field, 0);
    }
  }
  return params;
}

// Test-year samples prepared for `params`; unreadable rasters are reported, not fatal.
PreparedSet load_test_set(const Run& run, const ModelParams<float>& params, const DatasetManifest& manifest) {
  const SplitManifests parts = split_by_year(manifest, run.split);
  LoadedSamples loaded = load_samples(parts.test);
  PreparedSet set = prepare(loaded.samples, params);
  set.skipped = std::move(loaded.skipped);
  return set;
}

int finish_with_skips(const Run& run, const std::vector<SkippedEntry>& skipped) {
  if (skipped.empty()) return kExitOk;
  auto f = open_output(run.out / "skipped.csv");
  write_skip_report(f, skipped);
  *run.log << "warning: " << skipped.size() << " raster(s) skipped, see skipped.csv\n";
  return kExitUsage;
}

int cmd_synth(const Run& run) {
  SyntheticSpec spec;
  if (run.settings.spec) spec = parse_synthetic_spec(KeyValueFile::load(*run.settings.spec));
  if (run.settings.model.timesteps) spec.timesteps = *run.settings.model.timesteps;
  if (run.settings.model.image_size) spec.image_size = *run.settings.model.image_size;
  if (run.settings.state) spec.state = *run.settings.state;
  spec.validate();
  prepare_out_dir(run);
  const SyntheticDataset ds = generate_synthetic(spec, run.seed);
  write_synthetic(ds, run.out);
  write_run_meta(run, std::nullopt, std::nullopt,
                 {{"n_regions", std::to_string(spec.n_regions)},
                  {"years", join_years(spec.years)},
                  {"timesteps", std::to_string(spec.timesteps)},
                  {"image_size", std::to_string(spec.image_size)},
                  {"target_band", std::to_string(spec.target_band)},
                  {"target_month", std::to_string(spec.target_month)},
                  {"coefficient", format_double(spec.coefficient)},
                  {"noise_sd", format_double(spec.noise_sd)},
                  {"frame_jitter", format_double(spec.frame_jitter)}});
  *run.log << "wrote " << ds.samples.size() << " samples to " << run.out.string() << "\n";
  return kExitOk;
}

int cmd_train(const Run& run) {
  const Settings& s = run.settings;
  ModelConfig model;
  s.model.apply(model);
  model.validate();
  TrainConfig tc;
  tc.seed = run.seed;
  if (s.epochs) tc.epochs = *s.epochs;
  if (s.batch_size) tc.batch_size = *s.batch_size;
  if (s.learning_rate) tc.adam.step_size = *s.learning_rate;
  if (s.clip_norm) tc.clip_norm = *s.clip_norm;

  const SplitManifests parts = split_by_year(load_dataset(run), run.split);
  if (parts.train.empty()) throw InputError("train: manifest has no rows in the training years");
  LoadedSamples train = load_samples(parts.train);
  LoadedSamples val = load_samples(parts.val);
  if (!train.skipped.empty() || !val.skipped.empty()) {
    const auto& first = train.skipped.empty() ? val.skipped.front() : train.skipped.front();
    throw InputError("train: cannot read " + first.raster_path.string() + ": " + first.reason);
  }
  prepare_out_dir(run);
  const FitOutput fit = fit_model(model, train.samples, val.samples, tc);
  for (const auto& w : fit.stats.warnings) *run.log << "warning: " << w << "\n";

  const fs::path checkpoint = s.checkpoint ? fs::path(*s.checkpoint) : run.out / "checkpoint.ycp";
  save_params(fit.result.best, checkpoint);
  {
    auto f = open_output(run.out / "history.csv");
    write_history_csv(f, fit.result.history);
  }
  write_run_meta(run, model, tc, {{"best_epoch", std::to_string(fit.result.best_epoch)}});
  if (fit.result.history.empty()) {
    *run.log << "no epochs run; wrote initial parameters to " << checkpoint.string() << "\n";
  } else {
    *run.log << "best epoch " << fit.result.best_epoch << ", validation RMSE "
             << format_double(fit.result.best_val_rmse) << " kg/ha\n";
  }
  return kExitOk;
}

int cmd_evaluate(const Run& run) {
  const ModelParams<float> params = load_checkpoint(run);
  const DatasetManifest manifest = load_dataset(run);
  const PreparedSet test = load_test_set(run, params, manifest);
  prepare_out_dir(run);
  const EvalReport report = evaluate(params, test);
  {
    auto f = open_output(run.out / "predictions.csv");
    write_eval_csv(f, report);
  }
  write_run_meta(run, params.config, std::nullopt);
  *run.log << "test RMSE " << format_double(report.rmse) << " kg/ha over " << report.rows.size() << " regions\n";
  return finish_with_skips(run, test.skipped);
}

int cmd_early(const Run& run) {
  const ModelParams<float> params = load_checkpoint(run);
  const PreparedSet test = load_test_set(run, params, load_dataset(run));
  prepare_out_dir(run);
  const std::vector<double> curve = early_curve(params, test);
  {
    auto f = open_output(run.out / "early.csv");
    write_early_csv(f, curve);
  }
  write_run_meta(run, params.config, std::nullopt);
  *run.log << "RMSE at t=1: " << format_double(curve.front()) << ", at t=" << curve.size() << ": "
           << format_double(curve.back()) << " kg/ha\n";
  return finish_with_skips(run, test.skipped);
}

int cmd_importance(const Run& run) {
  const ModelParams<float> params = load_checkpoint(run);
  const PreparedSet test = load_test_set(run, params, load_dataset(run));
  const std::size_t n_draws = run.settings.n_draws.value_or(5);
  prepare_out_dir(run);
  const ImportanceReport months = month_importance(params, test, run.seed, n_draws);
  const ImportanceReport bands = band_importance(params, test, run.seed, n_draws);
  {
    auto f = open_output(run.out / "month_importance.csv");
    write_month_importance_csv(f, months);
  }
  {
    auto f = open_output(run.out / "band_importance.csv");
    write_band_importance_csv(f, bands);
  }
  write_run_meta(run, params.config, std::nullopt,
                 {{"n_draws", std::to_string(n_draws)}, {"baseline_rmse", format_double(months.baseline_rmse)}});
  *run.log << "baseline RMSE " << format_double(months.baseline_rmse) << " kg/ha\n";
  return finish_with_skips(run, test.skipped);
}

std::vector<LabeledIndex> ndvi_rows(const DatasetManifest& m, std::vector<std::string>& warnings) {
  LoadedSamples loaded = load_samples(m);
  if (!loaded.skipped.empty()) {
    throw InputError("cannot read " + loaded.skipped.front().raster_path.string() + ": " +
                     loaded.skipped.front().reason);
  }
  std::vector<LabeledIndex> rows;
  for (const auto& s : loaded.samples) rows.push_back(labeled_ndvi(s, &warnings));
  return rows;
}

int cmd_baseline(const Run& run) {
  const std::string method_text = run.require(run.settings.method, "--method");
  std::vector<BaselineMethod> methods;
  if (method_text == "all") {
    methods = {BaselineMethod::forest, BaselineMethod::tree, BaselineMethod::stepwise, BaselineMethod::ridge};
  } else {
    methods.push_back(parse_method(method_text));
  }
  const DatasetManifest manifest = load_dataset(run);
  std::vector<std::string> states;
  for (const auto& e : manifest.entries) {
    if (std::find(states.begin(), states.end(), e.record.state) == states.end()) states.push_back(e.record.state);
  }
  std::sort(states.begin(), states.end());
  if (states.empty()) throw InputError("baseline: manifest is empty");

  prepare_out_dir(run);
  std::vector<ResultRow> results;
  std::ostringstream predictions;
  predictions << "state,method,region_id,actual,predicted,error,area_ha\n";
  std::vector<std::string> warnings;
  for (const auto& state : states) {
    const SplitManifests parts = split_by_year(filter_state(manifest, state), run.split);
    const auto train = ndvi_rows(parts.train, warnings);
    const auto val = ndvi_rows(parts.val, warnings);
    const auto test = ndvi_rows(parts.test, warnings);
    for (BaselineMethod method : methods) {
      const BaselineOutcome o = evaluate_baseline(method, train, val, test, run.seed);
      warnings.insert(warnings.end(), o.warnings.begin(), o.warnings.end());
      results.push_back({state, std::string(display_name(method)), o.test_rmse});
      for (std::size_t i = 0; i < o.test_records.size(); ++i) {
        const auto& r = o.test_records[i];
        predictions << state << ',' << method_name(method) << ',' << r.region_id << ','
                    << format_double(r.yield_kg_per_ha) << ',' << format_double(o.test_predictions[i]) << ','
                    << format_double(o.test_predictions[i] - r.yield_kg_per_ha) << ','
                    << format_double(r.agri_area_ha) << '\n';
      }
      *run.log << state << " " << display_name(method) << " (" << o.chosen << "): RMSE "
               << format_double(o.test_rmse) << " kg/ha\n";
    }
  }
  {
    auto f = open_output(run.out / "results.csv");
    write_results_csv(f, results);
  }
  {
    auto f = open_output(run.out / "results_table.csv");
    f << render_results_table(results);
  }
  {
    auto f = open_output(run.out / "baseline_predictions.csv");
    f << predictions.str();
  }
  if (!warnings.empty()) {
    auto f = open_output(run.out / "warnings.txt");
    for (const auto& w : warnings) f << w << '\n';
  }
  write_run_meta(run, std::nullopt, std::nullopt);
  return kExitOk;
}

int cmd_cross(const Run& run) {
  const ModelParams<float> params = load_checkpoint(run);
  const DatasetManifest manifest = load_dataset(run);
  std::vector<std::string> states;
  for (const auto& e : manifest.entries) {
    if (std::find(states.begin(), states.end(), e.record.state) == states.end()) states.push_back(e.record.state);
  }
  std::sort(states.begin(), states.end());
  if (states.empty()) throw InputError("cross: manifest has no rows");
  const std::string train_state = run.settings.train_state.value_or("unknown");

  prepare_out_dir(run);
  std::vector<CrossResult> results;
  std::vector<SkippedEntry> skipped;
  for (const auto& state : states) {
    const PreparedSet test = load_test_set(run, params, filter_state(manifest, state));
    skipped.insert(skipped.end(), test.skipped.begin(), test.skipped.end());
    results.push_back(cross_eval(params, train_state, test, state));
    *run.log << train_state << " -> " << state << ": RMSE " << format_double(results.back().rmse) << " kg/ha\n";
  }
  {
    auto f = open_output(run.out / "cross.csv");
    write_cross_csv(f, results);
  }
  write_run_meta(run, params.config, std::nullopt, {{"train_state", train_state}});
  return finish_with_skips(run, skipped);
}

void add_common(CLI::App& sub, Settings& flags, std::optional<std::string>& config) {
  sub.add_option("--config", config, "key = value configuration file");
  sub.add_option("--manifest", flags.manifest, "Manifest file (region_id year raster_path per line)");
  sub.add_option("--labels", flags.labels, "Labels CSV (default: labels.csv next to the manifest)");
  sub.add_option("--raster-dir", flags.raster_dir, "Base directory for relative raster paths");
  sub.add_option("--out", flags.out, "Output directory");
  sub.add_option("--seed", flags.seed, "Root random seed");
  sub.add_option("--bands", flags.model.bands, "Model input bands (9 or 12)");
  sub.add_option("--timesteps", flags.model.timesteps, "Frames per sequence");
  sub.add_option("--image-size", flags.model.image_size, "Frame height and width in pixels");
  sub.add_option("--epochs", flags.epochs, "Training epochs");
  sub.add_option("--method", flags.method, "Baseline method: ridge, tree, forest, stepwise or all");
  sub.add_option("--state", flags.state, "Restrict to one state");
  sub.add_option("--checkpoint", flags.checkpoint, "Checkpoint file");
  sub.add_option("--spec", flags.spec, "Synthetic dataset spec file");
  sub.add_option("--n-draws", flags.n_draws, "Noise draws per importance cell");
  sub.add_option("--train-state", flags.train_state, "State the checkpoint was trained on");
  sub.add_option("--train-years", flags.train_years, "Training years, e.g. 2001-2009");
  sub.add_option("--val-year", flags.val_year, "Validation year");
  sub.add_option("--test-year", flags.test_year, "Test year");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"CNN-LSTM crop-yield pipeline"};
  app.require_subcommand(1);
  Settings flags;
  std::optional<std::string> config;

  const std::map<std::string, std::pair<std::string, std::function<int(const Run&)>>> commands = {
      {"synth", {"Generate a planted-signal synthetic dataset", cmd_synth}},
      {"train", {"Train the CNN-LSTM", cmd_train}},
      {"evaluate", {"Test-year RMSE and per-region predictions", cmd_evaluate}},
      {"early", {"RMSE of in-season prediction for every prefix length", cmd_early}},
      {"importance", {"Month and band importance by noise substitution", cmd_importance}},
      {"baseline", {"NDVI/VCI baselines", cmd_baseline}},
      {"cross", {"Evaluate a checkpoint on every state of a manifest", cmd_cross}},
  };
  for (const auto& [name, entry] : commands) add_common(*app.add_subcommand(name, entry.first), flags, config);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    Run r = resolve(chosen->get_name(), config, flags);
    r.log = &out;
    return commands.at(chosen->get_name()).second(r);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const EvaluationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cropyield::cli
