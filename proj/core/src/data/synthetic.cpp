#include "cropyield/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include "cropyield/rng.hpp"

namespace cropyield {

namespace {

constexpr std::size_t kBands = 12;
constexpr std::size_t kWater = 9, kAgri = 10, kUrban = 11;
constexpr double kPixelHectares = 25.0;  // 500 m pixels

// Coarse Gaussian lattice bilinearly upsampled to size x size.
std::vector<float> smooth_field(std::size_t size, SeededRng& rng) {
  constexpr std::size_t kGrid = 5;
  std::array<double, kGrid * kGrid> lattice{};
  for (auto& v : lattice) v = rng.normal();
  std::vector<float> out(size * size);
  const double step = size > 1 ? static_cast<double>(kGrid - 1) / static_cast<double>(size - 1) : 0.0;
  for (std::size_t y = 0; y < size; ++y) {
    const double gy = static_cast<double>(y) * step;
    const auto y0 = std::min<std::size_t>(static_cast<std::size_t>(gy), kGrid - 2);
    const double fy = gy - static_cast<double>(y0);
    for (std::size_t x = 0; x < size; ++x) {
      const double gx = static_cast<double>(x) * step;
      const auto x0 = std::min<std::size_t>(static_cast<std::size_t>(gx), kGrid - 2);
      const double fx = gx - static_cast<double>(x0);
      const double top = lattice[y0 * kGrid + x0] * (1 - fx) + lattice[y0 * kGrid + x0 + 1] * fx;
      const double bottom = lattice[(y0 + 1) * kGrid + x0] * (1 - fx) + lattice[(y0 + 1) * kGrid + x0 + 1] * fx;
      out[y * size + x] = static_cast<float>(top * (1 - fy) + bottom * fy);
    }
  }
  return out;
}

struct RegionLayout {
  std::vector<std::uint8_t> agri, water, urban;
  std::array<double, 7> reflectance_base{};
  double temperature_offset = 0.0;
  std::size_t agri_pixels = 0;
};

RegionLayout make_region(std::size_t size, SeededRng rng) {
  RegionLayout region;
  const std::size_t n = size * size;
  const auto field_a = smooth_field(size, rng);
  const auto field_w = smooth_field(size, rng);
  const auto field_u = smooth_field(size, rng);
  const double agri_fraction = rng.uniform(0.3, 0.7);

  std::vector<float> sorted = field_a;
  std::sort(sorted.begin(), sorted.end());
  const auto cut = static_cast<std::size_t>((1.0 - agri_fraction) * static_cast<double>(n));
  const float threshold = sorted[std::min(cut, n - 1)];

  region.agri.assign(n, 0);
  region.water.assign(n, 0);
  region.urban.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (field_a[p] >= threshold) {
      region.agri[p] = 1;
      ++region.agri_pixels;
    } else if (field_w[p] > 0.8f) {
      region.water[p] = 1;
    } else if (field_u[p] > 0.8f) {
      region.urban[p] = 1;
    }
  }
  if (region.agri_pixels == 0) {
    region.agri[0] = 1;
    region.water[0] = region.urban[0] = 0;
    region.agri_pixels = 1;
  }
  for (auto& b : region.reflectance_base) b = rng.uniform(0.05, 0.25);
  region.temperature_offset = rng.uniform(-3.0, 3.0);
  return region;
}

std::string region_name(std::size_t r) {
  std::string digits = std::to_string(r);
  return "R" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_regions == 0) throw InputError("synthetic spec: n_regions must be positive");
  if (years.empty()) throw InputError("synthetic spec: no years");
  if (timesteps == 0 || image_size == 0) throw InputError("synthetic spec: timesteps and image_size must be positive");
  if (target_band < 1 || target_band > kBands || is_mask(default_band_table()[target_band - 1].kind)) {
    throw InputError("synthetic spec: target_band must name one of the image bands 1-9, got " +
                     std::to_string(target_band));
  }
  if (target_month < 1 || 4 * (target_month - 1) >= timesteps) {
    throw InputError("synthetic spec: target_month " + std::to_string(target_month) + " has no frames in " +
                     std::to_string(timesteps) + " timesteps");
  }
  if (noise_sd < 0.0 || frame_jitter < 0.0) throw InputError("synthetic spec: noise levels must be non-negative");
  if (regions_per_district == 0) throw InputError("synthetic spec: regions_per_district must be positive");
}

SyntheticSpec parse_synthetic_spec(const KeyValueFile& file) {
  static constexpr std::string_view kKnown[] = {"state",       "n_regions",    "years",       "timesteps",
                                                "image_size",  "target_band",  "target_month", "coefficient",
                                                "noise_sd",    "frame_jitter", "regions_per_district"};
  file.require_known(kKnown);
  SyntheticSpec spec;
  auto positive = [&file](std::string_view key, std::size_t& into) {
    if (auto v = file.get_int(key)) {
      if (*v < 0) throw ParseError(file.source(), file.find(key)->line, std::string(key) + " must be non-negative");
      into = static_cast<std::size_t>(*v);
    }
  };
  if (auto v = file.get_string("state")) spec.state = *v;
  if (auto v = file.get_string("years")) {
    try {
      spec.years = parse_year_list(*v);
    } catch (const InputError& e) {
      throw ParseError(file.source(), file.find("years")->line, e.what());
    }
  }
  positive("n_regions", spec.n_regions);
  positive("timesteps", spec.timesteps);
  positive("image_size", spec.image_size);
  positive("target_band", spec.target_band);
  positive("target_month", spec.target_month);
  positive("regions_per_district", spec.regions_per_district);
  if (auto v = file.get_double("coefficient")) spec.coefficient = *v;
  if (auto v = file.get_double("noise_sd")) spec.noise_sd = *v;
  if (auto v = file.get_double("frame_jitter")) spec.frame_jitter = *v;
  return spec;
}

std::pair<std::size_t, std::size_t> month_frames(std::size_t month, std::size_t timesteps) {
  if (month < 1 || 4 * (month - 1) >= timesteps) {
    throw InputError("month " + std::to_string(month) + " has no frames in a " + std::to_string(timesteps) +
                     "-step sequence");
  }
  return {4 * (month - 1), std::min(4 * month, timesteps)};
}

double planted_feature(const RasterSequence& raster, std::size_t band, std::size_t month) {
  const auto agri = raster.find_band(BandKind::agriculture_mask);
  if (!agri) throw InputError("planted_feature: raster has no agriculture mask");
  if (band < 1 || band > raster.band_count()) throw InputError("planted_feature: band out of range");
  const auto [first, last] = month_frames(month, raster.timesteps());
  double total = 0.0;
  for (std::size_t t = first; t < last; ++t) {
    double sum = 0.0, weight = 0.0;
    for (std::size_t y = 0; y < raster.height(); ++y) {
      for (std::size_t x = 0; x < raster.width(); ++x) {
        const double m = raster.data[raster.index(t, y, x, *agri)];
        sum += m * raster.data[raster.index(t, y, x, band - 1)];
        weight += m;
      }
    }
    total += weight > 0.0 ? sum / weight : 0.0;
  }
  return total / static_cast<double>(last - first);
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticDataset ds;
  ds.spec = spec;
  ds.seed = seed;

  const SeededRng root(seed);
  const std::size_t size = spec.image_size, steps = spec.timesteps, n = size * size;
  const auto [signal_first, signal_last] = month_frames(spec.target_month, steps);
  const std::size_t target = spec.target_band - 1;
  std::vector<int> years = spec.years;
  std::sort(years.begin(), years.end());

  for (std::size_t r = 0; r < spec.n_regions; ++r) {
    const RegionLayout region = make_region(size, root.derive("region").derive(r));
    for (int year : years) {
      SeededRng rng = root.derive("sequence").derive(r).derive(static_cast<std::uint64_t>(year));
      const double level = rng.uniform(0.2, 0.8);

      RasterSequence raster;
      raster.region_id = region_name(r);
      raster.year = year;
      raster.bands = default_band_table();
      raster.data = Tensor({steps, size, size, kBands});

      for (std::size_t t = 0; t < steps; ++t) {
        const double phase = static_cast<double>(t) / static_cast<double>(steps);
        const double greenness = std::sin(std::numbers::pi * phase);
        const double day_temp = 300.0 + 8.0 * std::cos(2.0 * std::numbers::pi * phase) + region.temperature_offset +
                                rng.uniform(-1.0, 1.0);
        const bool signal_frame = t >= signal_first && t < signal_last;
        const double jitter = rng.uniform(-spec.frame_jitter, spec.frame_jitter);

        for (std::size_t b = 0; b < 9; ++b) {
          const auto noise = smooth_field(size, rng);
          double background;
          double amplitude;
          if (b < 7) {
            background = region.reflectance_base[b] + 0.15 * greenness + rng.uniform(-0.1, 0.1);
            amplitude = 0.02;
          } else {
            background = b == 7 ? day_temp : day_temp - 12.0;
            amplitude = 1.0;
          }
          for (std::size_t p = 0; p < n; ++p) {
            double base = background;
            if (signal_frame && b == target && region.agri[p]) base = level + jitter;
            double v = base + amplitude * noise[p];
            if (b < 7) v = std::clamp(v, 0.001, 1.0);
            raster.data[t * n * kBands + p * kBands + b] = static_cast<float>(v);
          }
        }
        for (std::size_t p = 0; p < n; ++p) {
          float* px = raster.data.data() + t * n * kBands + p * kBands;
          px[kWater] = region.water[p];
          px[kAgri] = region.agri[p];
          px[kUrban] = region.urban[p];
        }
      }

      const double feature = planted_feature(raster, spec.target_band, spec.target_month);
      double label = spec.coefficient * feature;
      if (spec.noise_sd > 0.0) label += rng.normal(0.0, spec.noise_sd);
      label = std::max(label, 0.0);

      RegionRecord record{raster.region_id,
                          spec.state,
                          year,
                          label,
                          static_cast<double>(region.agri_pixels) * kPixelHectares,
                          "D" + std::to_string(r / spec.regions_per_district)};
      ds.samples.push_back({std::move(record), std::move(raster)});
      ds.planted_features.push_back(feature);
    }
  }
  return ds;
}

DatasetManifest synthetic_manifest(const SyntheticDataset& ds) {
  DatasetManifest manifest;
  for (const auto& s : ds.samples) {
    manifest.entries.push_back(
        {s.record, std::filesystem::path("rasters") / (s.record.region_id + "_" + std::to_string(s.record.year) + ".ycst")});
  }
  return manifest;
}

void write_synthetic(const SyntheticDataset& ds, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "rasters", ec);
  if (ec) throw InputError("cannot create " + (out_dir / "rasters").string() + ": " + ec.message());

  const DatasetManifest manifest = synthetic_manifest(ds);
  auto open = [&out_dir](const char* name) {
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + (out_dir / name).string());
    return out;
  };

  {
    std::vector<RegionRecord> records;
    for (const auto& s : ds.samples) records.push_back(s.record);
    auto out = open("labels.csv");
    write_labels_csv(out, records);
  }
  {
    auto out = open("manifest.txt");
    write_manifest(out, manifest);
  }
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    write_raster(ds.samples[i].raster, out_dir / manifest.entries[i].raster_path);
  }
  {
    auto out = open("ground_truth.txt");
    out << "# planted relationship: label = coefficient * F + N(0, noise_sd)\n"
        << "# F = mean over the month's frames of the agriculture-masked mean of the band\n"
        << "band = " << ds.spec.target_band << "\n"
        << "month = " << ds.spec.target_month << "\n"
        << "coefficient = " << format_double(ds.spec.coefficient) << "\n"
        << "noise_sd = " << format_double(ds.spec.noise_sd) << "\n"
        << "seed = " << ds.seed << "\n";
  }
  {
    auto out = open("planted_features.csv");
    out << "region_id,year,planted_feature,label\n";
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      const auto& r = ds.samples[i].record;
      out << r.region_id << ',' << r.year << ',' << format_double(ds.planted_features[i]) << ','
          << format_double(r.yield_kg_per_ha) << '\n';
    }
  }
}

}  // namespace cropyield
