#include "maduv/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "maduv/binary_io.hpp"
#include "maduv/error.hpp"

namespace maduv {

AudioBuffer::AudioBuffer(int sample_rate_hz, std::vector<float> samples)
    : sample_rate_hz_(sample_rate_hz), samples_(std::move(samples)) {
  if (sample_rate_hz <= 0) throw DataError("sample rate must be positive");
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

FmtChunk parse_fmt(io::ByteReader chunk) {
  FmtChunk fmt;
  fmt.format = chunk.get<std::uint16_t>("fmt chunk");
  fmt.channels = chunk.get<std::uint16_t>("fmt chunk");
  fmt.sample_rate = chunk.get<std::uint32_t>("fmt chunk");
  chunk.get<std::uint32_t>("fmt chunk");  // byte rate
  fmt.block_align = chunk.get<std::uint16_t>("fmt chunk");
  fmt.bits = chunk.get<std::uint16_t>("fmt chunk");
  if (fmt.format == kFormatExtensible) {
    const auto cb_size = chunk.get<std::uint16_t>("fmt chunk");
    if (cb_size < 22) throw DataError("malformed WAVE_FORMAT_EXTENSIBLE header");
    chunk.get<std::uint16_t>("fmt chunk");  // valid bits
    chunk.get<std::uint32_t>("fmt chunk");  // channel mask
    fmt.format = chunk.get<std::uint16_t>("fmt chunk");  // leading bytes of the subformat GUID
  }
  return fmt;
}

std::int32_t read_int24(const std::byte* p) {
  const auto b0 = static_cast<std::uint32_t>(p[0]);
  const auto b1 = static_cast<std::uint32_t>(p[1]);
  const auto b2 = static_cast<std::uint32_t>(p[2]);
  std::uint32_t v = b0 | (b1 << 8) | (b2 << 16);
  if (v & 0x800000u) v |= 0xFF000000u;
  return static_cast<std::int32_t>(v);
}

}  // namespace

AudioBuffer parse_wav(std::span<const std::byte> bytes, const WavLoadOptions& options) {
  io::ByteReader reader(bytes);
  if (reader.get_string(4, "RIFF header") != "RIFF") throw DataError("not a RIFF file");
  reader.get<std::uint32_t>("RIFF header");
  if (reader.get_string(4, "RIFF header") != "WAVE") throw DataError("not a WAVE file");

  std::optional<FmtChunk> fmt;
  while (reader.remaining() >= 8) {
    const std::string id = reader.get_string(4, "chunk header");
    const auto size = reader.get<std::uint32_t>("chunk header");
    if (id == "fmt ") {
      if (reader.remaining() < size) throw DataError("truncated file (fmt chunk)");
      fmt = parse_fmt(io::ByteReader(reader.get_span(size, "fmt chunk")));
      if (size % 2 == 1 && reader.remaining() > 0) reader.skip(1, "chunk padding");
      continue;
    }
    if (id != "data") {
      if (reader.remaining() < size) throw DataError("truncated file (" + id + " chunk)");
      reader.skip(size + (size % 2 == 1 && reader.remaining() > size ? 1 : 0), "chunk");
      continue;
    }

    if (!fmt) throw DataError("data chunk before fmt chunk");
    if (fmt->channels != 1) {
      throw DataError("channel count != 1 (got " + std::to_string(fmt->channels) + ")");
    }
    const bool is_pcm = fmt->format == kFormatPcm &&
                        (fmt->bits == 16 || fmt->bits == 24 || fmt->bits == 32);
    const bool is_float = fmt->format == kFormatFloat && fmt->bits == 32;
    if (!is_pcm && !is_float) {
      throw DataError("unsupported encoding (format " + std::to_string(fmt->format) + ", " +
                      std::to_string(fmt->bits) + " bits)");
    }
    if (options.expected_sample_rate &&
        static_cast<int>(fmt->sample_rate) != *options.expected_sample_rate) {
      throw DataError("sample rate " + std::to_string(fmt->sample_rate) +
                      " != " + std::to_string(*options.expected_sample_rate));
    }
    const std::size_t width = fmt->bits / 8;
    if (fmt->block_align != width) throw DataError("inconsistent block alignment");
    if (size % width != 0 || reader.remaining() < size) {
      throw DataError("truncated file (data chunk declares " + std::to_string(size) +
                      " bytes, " + std::to_string(reader.remaining()) + " present)");
    }

    const std::size_t frames = size / width;
    const std::byte* p = reader.get_span(size, "data chunk").data();
    std::vector<float> samples(frames);
    if (is_float) {
      std::memcpy(samples.data(), p, frames * sizeof(float));
    } else if (fmt->bits == 16) {
      for (std::size_t i = 0; i < frames; ++i) {
        std::int16_t v;
        std::memcpy(&v, p + 2 * i, 2);
        samples[i] = static_cast<float>(v / 32768.0);
      }
    } else if (fmt->bits == 24) {
      for (std::size_t i = 0; i < frames; ++i) {
        samples[i] = static_cast<float>(read_int24(p + 3 * i) / 8388608.0);
      }
    } else {
      for (std::size_t i = 0; i < frames; ++i) {
        std::int32_t v;
        std::memcpy(&v, p + 4 * i, 4);
        samples[i] = static_cast<float>(v / 2147483648.0);
      }
    }
    return AudioBuffer(static_cast<int>(fmt->sample_rate), std::move(samples));
  }
  throw DataError(fmt ? "truncated file (no data chunk)" : "truncated file (no fmt chunk)");
}

AudioBuffer load_wav(const std::filesystem::path& path, const WavLoadOptions& options) {
  const auto bytes = io::read_file(path);
  try {
    return parse_wav(bytes, options);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::byte> encode_wav(std::span<const float> samples, int sample_rate_hz,
                                  WavEncoding encoding) {
  std::uint16_t bits = 32;
  std::uint16_t format = kFormatPcm;
  switch (encoding) {
    case WavEncoding::pcm16: bits = 16; break;
    case WavEncoding::pcm24: bits = 24; break;
    case WavEncoding::pcm32: bits = 32; break;
    case WavEncoding::float32: format = kFormatFloat; break;
  }
  const std::uint32_t width = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(samples.size() * width);

  io::ByteWriter w;
  w.put_bytes("RIFF");
  w.put<std::uint32_t>(36 + data_size + (data_size % 2));
  w.put_bytes("WAVE");
  w.put_bytes("fmt ");
  w.put<std::uint32_t>(16);
  w.put<std::uint16_t>(format);
  w.put<std::uint16_t>(1);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sample_rate_hz));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sample_rate_hz) * width);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(width));
  w.put<std::uint16_t>(bits);
  w.put_bytes("data");
  w.put<std::uint32_t>(data_size);

  const auto quantize = [](float x, double scale, double lo, double hi) {
    return std::clamp(std::nearbyint(static_cast<double>(x) * scale), lo, hi);
  };
  switch (encoding) {
    case WavEncoding::float32:
      w.put_array(samples);
      break;
    case WavEncoding::pcm16:
      for (float x : samples) w.put(static_cast<std::int16_t>(quantize(x, 32768.0, -32768.0, 32767.0)));
      break;
    case WavEncoding::pcm24:
      for (float x : samples) {
        const auto v = static_cast<std::int32_t>(quantize(x, 8388608.0, -8388608.0, 8388607.0));
        const auto u = static_cast<std::uint32_t>(v);
        w.put(static_cast<std::uint8_t>(u & 0xFF));
        w.put(static_cast<std::uint8_t>((u >> 8) & 0xFF));
        w.put(static_cast<std::uint8_t>((u >> 16) & 0xFF));
      }
      break;
    case WavEncoding::pcm32:
      for (float x : samples) {
        w.put(static_cast<std::int32_t>(quantize(x, 2147483648.0, -2147483648.0, 2147483647.0)));
      }
      break;
  }
  if (data_size % 2 == 1) w.put<std::uint8_t>(0);
  return std::move(w.bytes());
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples, int sample_rate_hz,
               WavEncoding encoding) {
  io::write_file(path, encode_wav(samples, sample_rate_hz, encoding));
}

}  // namespace maduv
