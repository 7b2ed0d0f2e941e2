#include "maduv/nn/checkpoint.hpp"

#include <cstring>
#include <string>

#include "maduv/binary_io.hpp"
#include "maduv/error.hpp"

namespace maduv::nn {

std::vector<std::byte> encode_checkpoint(const ModelParams& params) {
  io::ByteWriter w;
  w.put_bytes("MDVC");
  w.put<std::uint32_t>(kCheckpointVersion);
  const Architecture& a = params.arch;
  for (std::uint32_t v : {a.in_height, a.in_width, a.conv1_channels, a.conv2_channels, a.kernel, a.pool, a.hidden}) {
    w.put<std::uint32_t>(v);
  }
  params.for_each([&](std::string_view, const std::vector<float>& v) { w.put_array(std::span<const float>(v)); });
  return std::move(w.bytes());
}

ModelParams decode_checkpoint(std::span<const std::byte> bytes) {
  io::ByteReader r(bytes);
  if (r.get_string(4, "checkpoint header") != "MDVC") throw DataError("bad magic (not an MDVC checkpoint)");
  const auto version = r.get<std::uint32_t>("checkpoint header");
  if (version != kCheckpointVersion) throw DataError("version mismatch: checkpoint v" + std::to_string(version));
  Architecture a;
  a.in_height = r.get<std::uint32_t>("checkpoint header");
  a.in_width = r.get<std::uint32_t>("checkpoint header");
  a.conv1_channels = r.get<std::uint32_t>("checkpoint header");
  a.conv2_channels = r.get<std::uint32_t>("checkpoint header");
  a.kernel = r.get<std::uint32_t>("checkpoint header");
  a.pool = r.get<std::uint32_t>("checkpoint header");
  a.hidden = r.get<std::uint32_t>("checkpoint header");
  ModelParams p;
  try {
    p = ModelParams::zeros(a);
  } catch (const UsageError& e) {
    throw DataError(std::string("invalid checkpoint architecture: ") + e.what());
  }
  p.for_each([&](std::string_view, std::vector<float>& v) {
    const auto bytes_needed = v.size() * sizeof(float);
    std::memcpy(v.data(), r.get_span(bytes_needed, "checkpoint payload").data(), bytes_needed);
  });
  if (r.remaining() != 0) throw DataError("checkpoint payload longer than its architecture");
  return p;
}

void write_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint(params));
}

ModelParams read_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(io::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace maduv::nn
