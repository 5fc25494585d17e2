#include "cropyield/analysis/evaluation.hpp"

#include <ostream>

#include "cropyield/metrics.hpp"
#include "cropyield/model/network.hpp"
#include "cropyield/text.hpp"

namespace cropyield {

namespace {

void require_samples(const PreparedSet& set, const char* what) {
  if (set.empty()) throw InputError(std::string(what) + ": test set is empty");
}

std::vector<double> labels_of(const PreparedSet& set) {
  std::vector<double> y;
  y.reserve(set.size());
  for (const auto& s : set.samples) y.push_back(s.record.yield_kg_per_ha);
  return y;
}

double set_rmse(const ModelParams<float>& params, const PreparedSet& set) {
  std::vector<double> pred;
  pred.reserve(set.size());
  for (const auto& s : set.samples) pred.push_back(predict_full(params, s.input));
  return rmse(pred, labels_of(set));
}

// Overwrites frames [first, last) of `input` (all bands, or only `band`) with unit normals.
void fill_noise(Tensor& input, std::size_t first, std::size_t last, std::optional<std::size_t> band, SeededRng& rng) {
  const std::size_t nb = input.dim(3);
  const std::size_t frame = input.size() / input.dim(0);
  for (std::size_t t = first; t < last; ++t) {
    float* p = input.data() + t * frame;
    if (band) {
      for (std::size_t i = *band; i < frame; i += nb) p[i] = static_cast<float>(rng.normal());
    } else {
      for (std::size_t i = 0; i < frame; ++i) p[i] = static_cast<float>(rng.normal());
    }
  }
}

double perturbed_delta(const ModelParams<float>& params, const PreparedSet& test, double baseline, std::size_t month,
                       std::optional<std::size_t> band, std::uint64_t seed, std::size_t n_draws, NoiseKind kind) {
  const std::size_t months = month_count(params.config.timesteps);
  if (month < 1 || month > months) throw InputError("month out of range");
  const std::size_t first = (month - 1) * 4;
  const std::size_t last = std::min(first + 4, params.config.timesteps);
  const SeededRng cell = SeededRng(seed)
                             .derive(band ? "band" : "month")
                             .derive(static_cast<std::uint64_t>(month))
                             .derive(static_cast<std::uint64_t>(band ? *band : 0));
  const std::vector<double> y = labels_of(test);
  double total = 0.0;
  for (std::size_t d = 0; d < n_draws; ++d) {
    const SeededRng draw = cell.derive(static_cast<std::uint64_t>(d));
    std::vector<double> pred;
    pred.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (kind == NoiseKind::null_control) {
        Tensor copy = test.samples[i].input;
        pred.push_back(predict_full(params, copy));
        continue;
      }
      Tensor noisy = test.samples[i].input;
      SeededRng rng = draw.derive(static_cast<std::uint64_t>(i));
      fill_noise(noisy, first, last, band, rng);
      pred.push_back(predict_full(params, noisy));
    }
    total += rmse(pred, y);
  }
  return total / static_cast<double>(n_draws) - baseline;
}

void check_draws(std::size_t n_draws) {
  if (n_draws < 1) throw InputError("n_draws must be at least 1");
}

}  // namespace

EvalReport evaluate(const ModelParams<float>& params, const PreparedSet& test) {
  require_samples(test, "evaluate");
  EvalReport report;
  report.skipped = test.skipped;
  std::vector<double> pred, actual;
  for (const auto& s : test.samples) {
    EvalRow row;
    row.region_id = s.record.region_id;
    row.year = s.record.year;
    row.actual = s.record.yield_kg_per_ha;
    row.predicted = predict_full(params, s.input);
    row.error = row.predicted - row.actual;
    row.area_ha = s.record.agri_area_ha;
    pred.push_back(row.predicted);
    actual.push_back(row.actual);
    report.rows.push_back(std::move(row));
  }
  report.rmse = rmse(pred, actual);
  return report;
}

std::vector<double> early_curve(const ModelParams<float>& params, const PreparedSet& test) {
  require_samples(test, "early_curve");
  const std::size_t steps = params.config.timesteps;
  // Per-step outputs are causal, so one full pass gives every prefix.
  std::vector<std::vector<double>> pred(steps);
  for (const auto& s : test.samples) {
    const Tensor per_step = forward_sequence(params, s.input, RunMode::infer, nullptr);
    for (std::size_t t = 1; t <= steps; ++t) pred[t - 1].push_back(prefix_mean(per_step, t));
  }
  const std::vector<double> y = labels_of(test);
  std::vector<double> curve;
  for (std::size_t t = 0; t < steps; ++t) curve.push_back(rmse(pred[t], y));
  return curve;
}

EvalReport evaluate_with_curve(const ModelParams<float>& params, const PreparedSet& test) {
  EvalReport report = evaluate(params, test);
  report.early_rmse = early_curve(params, test);
  return report;
}

std::size_t month_count(std::size_t timesteps) { return (timesteps + 3) / 4; }

ImportanceReport month_importance(const ModelParams<float>& params, const PreparedSet& test, std::uint64_t seed,
                                  std::size_t n_draws, NoiseKind kind) {
  check_draws(n_draws);
  require_samples(test, "month_importance");
  ImportanceReport report;
  report.noise_seed = seed;
  report.n_draws = n_draws;
  report.baseline_rmse = set_rmse(params, test);
  for (std::size_t m = 1; m <= month_count(params.config.timesteps); ++m) {
    report.month_delta.push_back(
        perturbed_delta(params, test, report.baseline_rmse, m, std::nullopt, seed, n_draws, kind));
  }
  return report;
}

ImportanceReport band_importance(const ModelParams<float>& params, const PreparedSet& test, std::uint64_t seed,
                                 std::size_t n_draws, NoiseKind kind) {
  check_draws(n_draws);
  require_samples(test, "band_importance");
  ImportanceReport report;
  report.noise_seed = seed;
  report.n_draws = n_draws;
  report.baseline_rmse = set_rmse(params, test);
  for (std::size_t m = 1; m <= month_count(params.config.timesteps); ++m) {
    std::vector<double> row;
    for (std::size_t b = 0; b < params.config.bands; ++b) {
      row.push_back(perturbed_delta(params, test, report.baseline_rmse, m, b, seed, n_draws, kind));
    }
    report.band_delta.push_back(std::move(row));
  }
  return report;
}

CrossResult cross_eval(const ModelParams<float>& params, const std::string& train_state, const PreparedSet& test,
                       const std::string& test_state) {
  require_samples(test, "cross_eval");
  return {train_state, test_state, evaluate(params, test).rmse};
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
  out << "region_id,actual,predicted,error,area_ha\n";
  for (const auto& r : report.rows) {
    out << r.region_id << ',' << format_double(r.actual) << ',' << format_double(r.predicted) << ','
        << format_double(r.error) << ',' << format_double(r.area_ha) << '\n';
  }
}

void write_early_csv(std::ostream& out, const std::vector<double>& curve) {
  out << "t,rmse\n";
  for (std::size_t t = 0; t < curve.size(); ++t) out << t + 1 << ',' << format_double(curve[t]) << '\n';
}

void write_month_importance_csv(std::ostream& out, const ImportanceReport& report) {
  out << "month,delta_rmse\n";
  for (std::size_t m = 0; m < report.month_delta.size(); ++m) {
    out << m + 1 << ',' << format_double(report.month_delta[m]) << '\n';
  }
}

void write_band_importance_csv(std::ostream& out, const ImportanceReport& report) {
  out << "month,band,delta_rmse\n";
  for (std::size_t m = 0; m < report.band_delta.size(); ++m) {
    for (std::size_t b = 0; b < report.band_delta[m].size(); ++b) {
      out << m + 1 << ',' << b + 1 << ',' << format_double(report.band_delta[m][b]) << '\n';
    }
  }
}

void write_cross_csv(std::ostream& out, const std::vector<CrossResult>& results) {
  out << "train_state,test_state,rmse\n";
  for (const auto& r : results) out << r.train_state << ',' << r.test_state << ',' << format_double(r.rmse) << '\n';
}

void write_skip_report(std::ostream& out, const std::vector<SkippedEntry>& skipped) {
  out << "region_id,year,path,reason\n";
  for (const auto& s : skipped) {
    std::string reason = s.reason;
    for (auto& c : reason) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << s.region_id << ',' << s.year << ',' << s.raster_path.generic_string() << ',' << reason << '\n';
  }
}

}  // namespace cropyield
