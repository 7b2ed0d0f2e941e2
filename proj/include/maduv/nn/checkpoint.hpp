#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "maduv/nn/model.hpp"

namespace maduv::nn {

// "MDVC" v1, little-endian: char[4] magic, u32 version, u32 x 7 architecture
// (in_height, in_width, conv1_channels, conv2_channels, kernel, pool, hidden),
// then f32 arrays in Params declaration order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::byte> encode_checkpoint(const ModelParams& params);
ModelParams decode_checkpoint(std::span<const std::byte> bytes);
void write_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams read_checkpoint(const std::filesystem::path& path);

}  // namespace maduv::nn
