#include "cropyield/data/preprocess.hpp"

#include <cmath>

namespace cropyield {

RasterSequence apply_agri_mask(const RasterSequence& seq) {
  const auto agri = seq.find_band(BandKind::agriculture_mask);
  if (!agri) throw InputError("apply_agri_mask: raster has no agriculture mask band");
  std::vector<std::size_t> keep;
  for (std::size_t b = 0; b < seq.bands.size(); ++b) {
    if (!is_mask(seq.bands[b].kind)) keep.push_back(b);
  }
  if (keep.empty()) throw InputError("apply_agri_mask: raster has no image bands");

  RasterSequence out;
  out.region_id = seq.region_id;
  out.year = seq.year;
  for (auto b : keep) out.bands.push_back(seq.bands[b]);
  out.data = Tensor({seq.timesteps(), seq.height(), seq.width(), keep.size()});
  const std::size_t pixels = seq.timesteps() * seq.height() * seq.width();
  const std::size_t in_b = seq.band_count(), out_b = keep.size();
  for (std::size_t p = 0; p < pixels; ++p) {
    const float* src = seq.data.data() + p * in_b;
    float* dst = out.data.data() + p * out_b;
    const float m = src[*agri];
    for (std::size_t k = 0; k < out_b; ++k) dst[k] = src[keep[k]] * m;
  }
  return out;
}

NormStats compute_norm_stats(std::span<const RasterSequence* const> training) {
  if (training.empty()) throw InputError("compute_norm_stats: no training rasters");
  const auto& bands = training.front()->bands;
  const std::size_t nb = bands.size();
  for (const auto* s : training) {
    if (s->bands != bands) throw InputError("compute_norm_stats: rasters disagree on the band table");
  }

  std::vector<double> sum(nb, 0.0), sq(nb, 0.0);
  double count = 0.0;
  for (const auto* s : training) {
    const std::size_t pixels = s->data.size() / nb;
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t b = 0; b < nb; ++b) sum[b] += s->data[p * nb + b];
    }
    count += static_cast<double>(pixels);
  }
  std::vector<double> mean(nb);
  for (std::size_t b = 0; b < nb; ++b) mean[b] = sum[b] / count;
  for (const auto* s : training) {
    const std::size_t pixels = s->data.size() / nb;
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t b = 0; b < nb; ++b) {
        const double d = s->data[p * nb + b] - mean[b];
        sq[b] += d * d;
      }
    }
  }

  NormStats stats;
  stats.bands.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    auto& st = stats.bands[b];
    st.mean = mean[b];
    st.std = std::sqrt(sq[b] / count);
    if (is_mask(bands[b].kind)) {
      st.passthrough = true;
    } else if (!(st.std > 1e-12)) {
      st.passthrough = true;
      st.degenerate = true;
      stats.warnings.push_back("band " + std::to_string(b + 1) + " (" + bands[b].name +
                               ") has zero variance; passed through unnormalized");
    }
  }
  return stats;
}

NormStats compute_norm_stats(std::span<const RasterSequence> training) {
  std::vector<const RasterSequence*> ptrs;
  for (const auto& s : training) ptrs.push_back(&s);
  return compute_norm_stats(std::span<const RasterSequence* const>(ptrs));
}

void normalize_in_place(Tensor& data, const NormStats& stats) {
  const std::size_t nb = stats.bands.size();
  if (data.rank() != 4 || data.dim(3) != nb) {
    throw ShapeError("normalize: " + std::to_string(nb) + "-band statistics for raster " + to_string(data.shape()));
  }
  const std::size_t pixels = data.size() / nb;
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& st = stats.bands[b];
      if (st.passthrough) continue;
      float& v = data[p * nb + b];
      v = static_cast<float>((static_cast<double>(v) - st.mean) / st.std);
    }
  }
}

RasterSequence normalize(const RasterSequence& seq, const NormStats& stats) {
  RasterSequence out = seq;
  normalize_in_place(out.data, stats);
  return out;
}

RasterSequence denormalize(const RasterSequence& seq, const NormStats& stats) {
  const std::size_t nb = stats.bands.size();
  if (seq.band_count() != nb) throw ShapeError("denormalize: band count mismatch");
  RasterSequence out = seq;
  const std::size_t pixels = out.data.size() / nb;
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& st = stats.bands[b];
      if (st.passthrough) continue;
      float& v = out.data[p * nb + b];
      v = static_cast<float>(static_cast<double>(v) * st.std + st.mean);
    }
  }
  return out;
}

}  // namespace cropyield
