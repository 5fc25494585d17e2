#pragma once

#include <map>
#include <string>
#include <vector>

#include "cropyield/data/raster.hpp"

namespace cropyield {

inline constexpr char kRedBandName[] = "sur_refl_b01_red";
inline constexpr char kNirBandName[] = "sur_refl_b02_nir";

/// One index value per timestep for a region-year.
struct FeatureVector {
  std::string region_id;
  int year = 0;
  std::vector<double> values;
};

struct IndexResult {
  FeatureVector features;
  std::vector<std::string> warnings;
};

/// Per-timestep NDVI, (NIR - Red) / (NIR + Red), averaged over agriculture
/// pixels. Pixels with NIR + Red == 0 are skipped; a timestep without any
/// valid pixel gets 0 and a warning.
IndexResult ndvi(const RasterSequence& seq);

/// Vegetation condition index of `target_year` against the min/max NDVI
/// envelope of `reference_years` (per timestep):
///   100 * (ndvi - min) / (max - min), or 50 with a warning when max == min.
IndexResult vci(const std::map<int, FeatureVector>& ndvi_by_year, int target_year,
                const std::vector<int>& reference_years);

}  // namespace cropyield
