#pragma once

#include <filesystem>
#include <iosfwd>

#include "cropyield/model/params.hpp"

namespace cropyield {

inline constexpr char kCheckpointMagic[] = "YCKP";
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (all little-endian):
//   "YCKP" | u32 version | ModelConfig (12 x u32, 2 x f32) | u32 tensor count |
//   per tensor: u32 rank, rank x u32 dims, f32 values
// Tensors follow ModelParams::visit order, then input_mean, input_std and
// [label_mean, label_std].
void write_params(std::ostream& out, const ModelParams<float>& params);
ModelParams<float> read_params(std::istream& in, const std::string& source = "<stream>");

void save_params(const ModelParams<float>& params, const std::filesystem::path& path);
ModelParams<float> load_params(const std::filesystem::path& path);

// Throws ConfigMismatchError naming the first differing field.
ModelParams<float> load_params(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace cropyield
