#pragma once

#include <filesystem>

#include "hga/params.hpp"

namespace hga {

// Parameter checkpoint layout (all integers little-endian):
//   8 bytes  magic "HGACKPT\0"
//   u32      format version (1)
//   u64      manifest length N
//   N bytes  JSON manifest {"version":1,"tensors":[{"name","shape","offset","count"}]}
//   f64[]    tensor values, concatenated in manifest order
// Optimizer moments are not stored.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_params(const std::filesystem::path& path, const ParamStore& params);
ParamStore load_params(const std::filesystem::path& path);

}  // namespace hga
