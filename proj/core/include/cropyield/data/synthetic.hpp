#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cropyield/data/dataset.hpp"
#include "cropyield/text.hpp"

namespace cropyield {

/// Planted-signal dataset description.
///
/// Each label is `coefficient * F + N(0, noise_sd)` where F is the mean, over
/// the four frames of `target_month`, of the agriculture-masked spatial mean
/// of `target_band`. Inside agricultural pixels that band carries a
/// region-year level (plus per-frame jitter) that is drawn independently of
/// every other band and month, so only that (month, band) cell is
/// informative.
struct SyntheticSpec {
  std::string state = "Synthetic";
  std::size_t n_regions = 16;
  std::vector<int> years{2001, 2002, 2003, 2004, 2005, 2006, 2007, 2008, 2009, 2010, 2011};
  std::size_t timesteps = 24;
  std::size_t image_size = 32;
  std::size_t target_band = 2;   // 1-based band number, must be a non-mask band
  std::size_t target_month = 1;  // 1-based; month m covers frames 4m-3..4m
  double coefficient = 4000.0;
  double noise_sd = 0.0;
  double frame_jitter = 0.05;
  std::size_t regions_per_district = 4;

  void validate() const;
};

// Reads the keys state, n_regions, years, timesteps, image_size,
// target_band, target_month, coefficient, noise_sd, frame_jitter,
// regions_per_district. Unknown keys are rejected.
SyntheticSpec parse_synthetic_spec(const KeyValueFile& file);

struct SyntheticDataset {
  SyntheticSpec spec;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;            // sorted by (region_id, year)
  std::vector<double> planted_features;   // F per sample
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Frames [first, last) belonging to 1-based `month`, clipped to the sequence.
std::pair<std::size_t, std::size_t> month_frames(std::size_t month, std::size_t timesteps);

// F recomputed from raster values (bands are 1-based).
double planted_feature(const RasterSequence& raster, std::size_t band, std::size_t month);

// Manifest with raster paths `rasters/<region>_<year>.ycst` relative to the output dir.
DatasetManifest synthetic_manifest(const SyntheticDataset& ds);

/// Writes labels.csv, manifest.txt, rasters/*.ycst, ground_truth.txt and
/// planted_features.csv under `out_dir`.
void write_synthetic(const SyntheticDataset& ds, const std::filesystem::path& out_dir);

}  // namespace cropyield
