#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cropyield/analysis/pipeline.hpp"

namespace cropyield {

struct EvalRow {
  std::string region_id;
  int year = 0;
  double actual = 0.0;
  double predicted = 0.0;
  double error = 0.0;  // predicted - actual
  double area_ha = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;           // sorted by (region_id, year)
  double rmse = 0.0;
  std::vector<double> early_rmse;      // t = 1..T, filled by evaluate_with_curve
  std::vector<SkippedEntry> skipped;
};

// Full-season prediction per sample and aggregate RMSE. Empty sets are input errors.
EvalReport evaluate(const ModelParams<float>& params, const PreparedSet& test);

// RMSE of predict_early over the set for every t = 1..T.
std::vector<double> early_curve(const ModelParams<float>& params, const PreparedSet& test);

EvalReport evaluate_with_curve(const ModelParams<float>& params, const PreparedSet& test);

enum class NoiseKind {
  gaussian,      // standard normal in normalized band space
  null_control,  // frames replaced by themselves
};

/// Increase in RMSE when inputs are replaced by noise. Month m covers frames
/// 4m-3..4m; deltas are mean perturbed RMSE over `n_draws` draws minus the
/// unperturbed RMSE, unclamped.
struct ImportanceReport {
  double baseline_rmse = 0.0;
  std::vector<double> month_delta;               // [months]
  std::vector<std::vector<double>> band_delta;   // [months][bands]
  std::uint64_t noise_seed = 0;
  std::size_t n_draws = 0;
};

std::size_t month_count(std::size_t timesteps);

// Fills baseline_rmse and month_delta.
ImportanceReport month_importance(const ModelParams<float>& params, const PreparedSet& test, std::uint64_t seed,
                                  std::size_t n_draws = 5, NoiseKind kind = NoiseKind::gaussian);

// Fills baseline_rmse and band_delta.
ImportanceReport band_importance(const ModelParams<float>& params, const PreparedSet& test, std::uint64_t seed,
                                 std::size_t n_draws = 5, NoiseKind kind = NoiseKind::gaussian);

struct CrossResult {
  std::string train_state;
  std::string test_state;
  double rmse = 0.0;
};

CrossResult cross_eval(const ModelParams<float>& params, const std::string& train_state, const PreparedSet& test,
                       const std::string& test_state);

// `region_id,actual,predicted,error,area_ha`
void write_eval_csv(std::ostream& out, const EvalReport& report);
// `t,rmse`
void write_early_csv(std::ostream& out, const std::vector<double>& curve);
// `month,delta_rmse`
void write_month_importance_csv(std::ostream& out, const ImportanceReport& report);
// `month,band,delta_rmse`
void write_band_importance_csv(std::ostream& out, const ImportanceReport& report);
// `train_state,test_state,rmse`
void write_cross_csv(std::ostream& out, const std::vector<CrossResult>& results);
// `region_id,year,path,reason`
void write_skip_report(std::ostream& out, const std::vector<SkippedEntry>& skipped);

}  // namespace cropyield
