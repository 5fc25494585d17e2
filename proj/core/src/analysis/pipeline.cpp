#include "cropyield/analysis/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace cropyield {

LoadedSamples load_samples(const DatasetManifest& manifest) {
  LoadedSamples out;
  for (const auto& e : manifest.entries) {
    try {
      RasterSequence r = read_raster(e.raster_path);
      r.region_id = e.record.region_id;
      r.year = e.record.year;
      out.samples.push_back({e.record, std::move(r)});
    } catch (const Error& err) {
      out.skipped.push_back({e.record.region_id, e.record.year, e.raster_path, err.what()});
    }
  }
  return out;
}

RasterSequence model_raster(const RasterSequence& raw, const ModelConfig& config) {
  if (raw.timesteps() != config.timesteps) {
    throw ShapeError("raster " + raw.region_id + "/" + std::to_string(raw.year) + " has " +
                     std::to_string(raw.timesteps()) + " frames, model expects " + std::to_string(config.timesteps));
  }
  if (raw.band_count() == config.bands) return raw;
  if (raw.band_count() == 12 && config.bands == 9) return apply_agri_mask(raw);
  throw ShapeError("raster has " + std::to_string(raw.band_count()) + " bands, model expects " +
                   std::to_string(config.bands));
}

NormStats fit_norm_stats(std::span<const Sample> training, const ModelConfig& config) {
  if (training.empty()) throw InputError("normalization needs at least one training sample");
  std::vector<RasterSequence> rasters;
  rasters.reserve(training.size());
  for (const auto& s : training) rasters.push_back(model_raster(s.raster, config));
  return compute_norm_stats(std::span<const RasterSequence>(rasters));
}

void store_norm_stats(ModelParams<float>& params, const NormStats& stats) {
  if (stats.bands.size() != params.config.bands) throw ShapeError("store_norm_stats: band count mismatch");
  for (std::size_t b = 0; b < stats.bands.size(); ++b) {
    const auto& s = stats.bands[b];
    params.input_mean[b] = s.passthrough ? 0.0f : static_cast<float>(s.mean);
    params.input_std[b] = s.passthrough ? 0.0f : static_cast<float>(s.std);
  }
}

NormStats norm_stats_of(const ModelParams<float>& params) {
  NormStats stats;
  for (std::size_t b = 0; b < params.input_mean.size(); ++b) {
    BandStats s;
    s.mean = params.input_mean[b];
    s.std = params.input_std[b];
    s.passthrough = !(s.std > 0.0);
    stats.bands.push_back(s);
  }
  return stats;
}

Tensor model_input(const RasterSequence& raw, const ModelConfig& config, const NormStats& stats) {
  RasterSequence r = model_raster(raw, config);
  normalize_in_place(r.data, stats);
  if (r.height() != config.input_height || r.width() != config.input_width) {
    r = pad_to(r, config.input_height, config.input_width);
  }
  return std::move(r.data);
}

PreparedSet prepare(std::span<const Sample> samples, const ModelParams<float>& params) {
  const NormStats stats = norm_stats_of(params);
  PreparedSet set;
  set.samples.reserve(samples.size());
  for (const auto& s : samples) set.samples.push_back({s.record, model_input(s.raster, params.config, stats)});
  std::sort(set.samples.begin(), set.samples.end(), [](const PreparedSample& a, const PreparedSample& b) {
    return std::tie(a.record.region_id, a.record.year) < std::tie(b.record.region_id, b.record.year);
  });
  return set;
}

std::string sample_id(const RegionRecord& record) { return record.region_id + "/" + std::to_string(record.year); }

std::vector<TrainSample> to_train_samples(const PreparedSet& set) {
  std::vector<TrainSample> out;
  out.reserve(set.size());
  for (const auto& s : set.samples) out.push_back({sample_id(s.record), s.input, s.record.yield_kg_per_ha});
  return out;
}

FitOutput fit_model(const ModelConfig& config, std::span<const Sample> train, std::span<const Sample> val,
                    const TrainConfig& train_config) {
  if (train.empty()) throw InputError("training set is empty");
  FitOutput out;
  out.stats = fit_norm_stats(train, config);
  SeededRng init = SeededRng(train_config.seed).derive("init");
  ModelParams<float> params = ModelParams<float>::initialize(config, init);
  store_norm_stats(params, out.stats);
  const auto train_set = to_train_samples(prepare(train, params));
  const auto val_set = to_train_samples(prepare(val, params));
  out.result = cropyield::train(params, train_set, val_set, train_config);
  return out;
}

}  // namespace cropyield
