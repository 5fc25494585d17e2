#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cropyield/data/dataset.hpp"
#include "cropyield/data/preprocess.hpp"
#include "cropyield/model/params.hpp"
#include "cropyield/model/train.hpp"

namespace cropyield {

// A manifest row that could not be used.
struct SkippedEntry {
  std::string region_id;
  int year = 0;
  std::filesystem::path raster_path;
  std::string reason;
};

struct LoadedSamples {
  std::vector<Sample> samples;  // manifest order
  std::vector<SkippedEntry> skipped;
};

// Reads every raster of `manifest`; unreadable files are listed in `skipped`.
LoadedSamples load_samples(const DatasetManifest& manifest);

/// Raster in the band layout the model expects: a 12-band stack feeding a
/// 9-band model is agriculture-masked first. Any other band mismatch, or a
/// timestep count different from the config, is a shape error.
RasterSequence model_raster(const RasterSequence& raw, const ModelConfig& config);

// Normalization statistics over the training rasters in model layout.
NormStats fit_norm_stats(std::span<const Sample> training, const ModelConfig& config);

void store_norm_stats(ModelParams<float>& params, const NormStats& stats);
NormStats norm_stats_of(const ModelParams<float>& params);

// Network input [T x H x W x B]: model layout, normalized, zero-padded to the configured frame size.
Tensor model_input(const RasterSequence& raw, const ModelConfig& config, const NormStats& stats);

struct PreparedSample {
  RegionRecord record;
  Tensor input;
};

/// Model-ready samples, sorted by (region_id, year).
struct PreparedSet {
  std::vector<PreparedSample> samples;
  std::vector<SkippedEntry> skipped;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Uses the normalization stored in `params`.
PreparedSet prepare(std::span<const Sample> samples, const ModelParams<float>& params);

// "<region_id>/<year>"
std::string sample_id(const RegionRecord& record);

std::vector<TrainSample> to_train_samples(const PreparedSet& set);

struct FitOutput {
  TrainResult result;
  NormStats stats;
};

/// Computes normalization on `train`, initializes the network from
/// `train_config.seed`, and trains with validation-based model selection.
FitOutput fit_model(const ModelConfig& config, std::span<const Sample> train, std::span<const Sample> val,
                    const TrainConfig& train_config);

}  // namespace cropyield
