#include "cropyield/data/raster.hpp"

#include <fstream>

#include "cropyield/binary_io.hpp"

namespace cropyield {

bool is_mask(BandKind kind) {
  return kind == BandKind::water_mask || kind == BandKind::agriculture_mask || kind == BandKind::urban_mask;
}

std::string to_string(BandKind kind) {
  switch (kind) {
    case BandKind::reflectance: return "reflectance";
    case BandKind::temperature: return "temperature";
    case BandKind::water_mask: return "water_mask";
    case BandKind::agriculture_mask: return "agriculture_mask";
    case BandKind::urban_mask: return "urban_mask";
    case BandKind::other: return "other";
  }
  return "other";
}

std::vector<BandDescriptor> default_band_table() {
  return {
      {BandKind::reflectance, "sur_refl_b01_red"},
      {BandKind::reflectance, "sur_refl_b02_nir"},
      {BandKind::reflectance, "sur_refl_b03_blue"},
      {BandKind::reflectance, "sur_refl_b04_green"},
      {BandKind::reflectance, "sur_refl_b05_nir2"},
      {BandKind::reflectance, "sur_refl_b06_swir1"},
      {BandKind::reflectance, "sur_refl_b07_swir2"},
      {BandKind::temperature, "lst_day_kelvin"},
      {BandKind::temperature, "lst_night_kelvin"},
      {BandKind::water_mask, "mask_water"},
      {BandKind::agriculture_mask, "mask_agriculture"},
      {BandKind::urban_mask, "mask_urban"},
  };
}

std::optional<std::size_t> RasterSequence::find_band(BandKind kind) const {
  for (std::size_t b = 0; b < bands.size(); ++b) {
    if (bands[b].kind == kind) return b;
  }
  return std::nullopt;
}

std::size_t raster_payload_bytes(std::size_t t, std::size_t h, std::size_t w, std::size_t b) {
  return t * h * w * b * 4;
}

void write_raster(std::ostream& out, const RasterSequence& seq) {
  if (seq.data.rank() != 4) throw ShapeError("write_raster: data must be [T x H x W x B], got " + to_string(seq.data.shape()));
  if (seq.bands.size() != seq.band_count()) {
    throw InputError("write_raster: " + std::to_string(seq.bands.size()) + " band descriptors for " +
                     std::to_string(seq.band_count()) + " bands");
  }
  io::put_bytes(out, kRasterMagic);
  io::put_u32(out, kRasterVersion);
  for (auto d : seq.data.shape()) io::put_u32(out, static_cast<std::uint32_t>(d));
  for (const auto& band : seq.bands) {
    io::put_u32(out, static_cast<std::uint32_t>(band.kind));
    io::put_u32(out, static_cast<std::uint32_t>(band.name.size()));
    io::put_bytes(out, band.name);
  }
  io::put_f32_array(out, seq.data.data(), seq.data.size());
}

RasterSequence read_raster(std::istream& in, const std::string& source) {
  io::Reader r(in, source);
  r.expect_magic(kRasterMagic);
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kRasterVersion) {
    throw FormatError(source + ": unsupported raster version " + std::to_string(version), version_at);
  }
  Shape shape(4);
  for (auto& d : shape) {
    d = r.u32("dimensions");
    if (d == 0) throw FormatError(source + ": zero dimension in header", r.offset() - 4);
  }
  RasterSequence seq;
  for (std::size_t b = 0; b < shape[3]; ++b) {
    const std::size_t kind_at = r.offset();
    const std::uint32_t kind = r.u32("band kind");
    if (kind > static_cast<std::uint32_t>(BandKind::other)) {
      throw FormatError(source + ": unknown band kind " + std::to_string(kind), kind_at);
    }
    const std::uint32_t len = r.u32("band name length");
    if (len > 4096) throw FormatError(source + ": band name too long", r.offset() - 4);
    seq.bands.push_back({static_cast<BandKind>(kind), r.bytes(len, "band name")});
  }
  seq.data = Tensor(shape);
  r.f32_array(seq.data.data(), seq.data.size(), "pixel data");
  r.expect_end();
  return seq;
}

void write_raster(const RasterSequence& seq, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open raster for writing: " + path.string());
  write_raster(out, seq);
  if (!out) throw InputError("failed writing raster: " + path.string());
}

RasterSequence read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open raster: " + path.string());
  return read_raster(in, path.string());
}

RasterSequence pad_to(const RasterSequence& seq, std::size_t height, std::size_t width) {
  if (seq.height() > height || seq.width() > width) {
    throw ShapeError("pad_to: raster " + to_string(seq.data.shape()) + " exceeds " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
  RasterSequence out = seq;
  out.data = Tensor({seq.timesteps(), height, width, seq.band_count()});
  const std::size_t row_len = seq.width() * seq.band_count();
  for (std::size_t t = 0; t < seq.timesteps(); ++t) {
    for (std::size_t y = 0; y < seq.height(); ++y) {
      const float* src = seq.data.data() + seq.index(t, y, 0, 0);
      float* dst = out.data.data() + out.index(t, y, 0, 0);
      std::copy_n(src, row_len, dst);
    }
  }
  return out;
}

}  // namespace cropyield
