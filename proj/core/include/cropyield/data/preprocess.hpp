#pragma once

#include <span>
#include <string>
#include <vector>

#include "cropyield/data/raster.hpp"

namespace cropyield {

/// Multiplies every non-mask band per pixel by the agriculture mask, then
/// drops the mask bands (12 bands in, 9 out for the default layout).
RasterSequence apply_agri_mask(const RasterSequence& seq);

struct BandStats {
  double mean = 0.0;
  double std = 0.0;
  bool passthrough = false;  // mask band, or degenerate
  bool degenerate = false;   // zero variance over the training data
};

/// Per-band z-score statistics from the training split. Mask bands are
/// exempt; constant bands are flagged and passed through.
struct NormStats {
  std::vector<BandStats> bands;
  std::vector<std::string> warnings;
};

NormStats compute_norm_stats(std::span<const RasterSequence> training);
NormStats compute_norm_stats(std::span<const RasterSequence* const> training);

RasterSequence normalize(const RasterSequence& seq, const NormStats& stats);
RasterSequence denormalize(const RasterSequence& seq, const NormStats& stats);

// Normalizes raw values in place ([T x H x W x B] layout).
void normalize_in_place(Tensor& data, const NormStats& stats);

}  // namespace cropyield
