#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cropyield/tensor.hpp"

namespace cropyield {

enum class BandKind : std::uint32_t {
  reflectance = 0,
  temperature = 1,
  water_mask = 2,
  agriculture_mask = 3,
  urban_mask = 4,
  other = 5,
};

bool is_mask(BandKind kind);
std::string to_string(BandKind kind);

struct BandDescriptor {
  BandKind kind = BandKind::other;
  std::string name;

  bool operator==(const BandDescriptor&) const = default;
};

// The 12-band layout: seven surface-reflectance bands (1 red, 2 NIR, ...),
// day and night land-surface temperature in Kelvin, then water, agriculture
// and urban masks.
std::vector<BandDescriptor> default_band_table();

/// One region-year image sequence, [T x H x W x B] in (frame, row, col, band)
/// order. Band meaning comes from the descriptor table, not the position.
struct RasterSequence {
  std::string region_id;
  int year = 0;
  Tensor data;
  std::vector<BandDescriptor> bands;

  std::size_t timesteps() const { return data.dim(0); }
  std::size_t height() const { return data.dim(1); }
  std::size_t width() const { return data.dim(2); }
  std::size_t band_count() const { return data.dim(3); }

  std::size_t index(std::size_t t, std::size_t row, std::size_t col, std::size_t band) const {
    return ((t * height() + row) * width() + col) * band_count() + band;
  }

  // Position of the first band of the given kind.
  std::optional<std::size_t> find_band(BandKind kind) const;
};

inline constexpr char kRasterMagic[] = "YCST";
inline constexpr std::uint32_t kRasterVersion = 1;

// Layout (little-endian): "YCST" | u32 version | u32 T, H, W, B |
// B x (u32 kind, u32 name length, name bytes) | T*H*W*B f32 values.
void write_raster(std::ostream& out, const RasterSequence& seq);
RasterSequence read_raster(std::istream& in, const std::string& source = "<stream>");

void write_raster(const RasterSequence& seq, const std::filesystem::path& path);
RasterSequence read_raster(const std::filesystem::path& path);

std::size_t raster_payload_bytes(std::size_t t, std::size_t h, std::size_t w, std::size_t b);

// Zero-pads bottom/right to height x width, every band including masks.
RasterSequence pad_to(const RasterSequence& seq, std::size_t height, std::size_t width);

}  // namespace cropyield
