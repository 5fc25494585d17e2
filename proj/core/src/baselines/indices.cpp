#include "cropyield/baselines/indices.hpp"

#include <algorithm>
#include <limits>

namespace cropyield {

namespace {

std::optional<std::size_t> band_named(const RasterSequence& seq, std::string_view name) {
  for (std::size_t b = 0; b < seq.bands.size(); ++b) {
    if (seq.bands[b].name == name) return b;
  }
  return std::nullopt;
}

}  // namespace

IndexResult ndvi(const RasterSequence& seq) {
  const auto red = band_named(seq, kRedBandName);
  const auto nir = band_named(seq, kNirBandName);
  if (!red || !nir) throw InputError("ndvi: raster lacks the red and NIR reflectance bands");
  const auto agri = seq.find_band(BandKind::agriculture_mask);
  if (!agri) throw InputError("ndvi: raster lacks the agriculture mask band");

  IndexResult result;
  result.features.region_id = seq.region_id;
  result.features.year = seq.year;
  for (std::size_t t = 0; t < seq.timesteps(); ++t) {
    double sum = 0.0;
    std::size_t valid = 0;
    for (std::size_t y = 0; y < seq.height(); ++y) {
      for (std::size_t x = 0; x < seq.width(); ++x) {
        if (seq.data[seq.index(t, y, x, *agri)] <= 0.5f) continue;
        const double r = seq.data[seq.index(t, y, x, *red)];
        const double n = seq.data[seq.index(t, y, x, *nir)];
        if (n + r == 0.0) continue;
        sum += (n - r) / (n + r);
        ++valid;
      }
    }
    if (valid == 0) {
      result.warnings.push_back(seq.region_id + " " + std::to_string(seq.year) + ": no valid agriculture pixels at step " +
                                std::to_string(t + 1));
      result.features.values.push_back(0.0);
    } else {
      result.features.values.push_back(sum / static_cast<double>(valid));
    }
  }
  return result;
}

IndexResult vci(const std::map<int, FeatureVector>& ndvi_by_year, int target_year,
                const std::vector<int>& reference_years) {
  const auto target = ndvi_by_year.find(target_year);
  if (target == ndvi_by_year.end()) throw InputError("vci: no NDVI for target year " + std::to_string(target_year));
  std::vector<const FeatureVector*> refs;
  for (int y : reference_years) {
    const auto it = ndvi_by_year.find(y);
    if (it != ndvi_by_year.end()) refs.push_back(&it->second);
  }
  if (refs.size() < 2) {
    throw InputError("vci: region " + target->second.region_id + " has " + std::to_string(refs.size()) +
                     " reference years, need at least 2");
  }
  const std::size_t steps = target->second.values.size();
  for (const auto* r : refs) {
    if (r->values.size() != steps) throw ShapeError("vci: NDVI vectors differ in length");
  }

  IndexResult result;
  result.features.region_id = target->second.region_id;
  result.features.year = target_year;
  for (std::size_t t = 0; t < steps; ++t) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* r : refs) {
      lo = std::min(lo, r->values[t]);
      hi = std::max(hi, r->values[t]);
    }
    if (hi == lo) {
      result.warnings.push_back(result.features.region_id + ": flat NDVI envelope at step " + std::to_string(t + 1));
      result.features.values.push_back(50.0);
    } else {
      result.features.values.push_back(100.0 * (target->second.values[t] - lo) / (hi - lo));
    }
  }
  return result;
}

}  // namespace cropyield
