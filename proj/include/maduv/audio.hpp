#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace maduv {

inline constexpr int kChallengeSampleRate = 300'000;

/// Mono sample stream. Samples are nominally in [-1, 1].
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(int sample_rate_hz, std::vector<float> samples);

  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  std::span<const float> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_s() const noexcept {
    return sample_rate_hz_ > 0 ? static_cast<double>(samples_.size()) / sample_rate_hz_ : 0.0;
  }

 private:
  int sample_rate_hz_ = kChallengeSampleRate;
  std::vector<float> samples_;
};

enum class WavEncoding { pcm16, pcm24, pcm32, float32 };

struct WavLoadOptions {
  // Required sample rate; std::nullopt accepts any rate.
  std::optional<int> expected_sample_rate = kChallengeSampleRate;
};

/// Reads a mono RIFF/WAVE file (PCM 16/24/32-bit integer or 32-bit float).
/// Integer PCM is mapped to floats by dividing by 2^(bits-1). Throws DataError.
AudioBuffer load_wav(const std::filesystem::path& path, const WavLoadOptions& options = {});
AudioBuffer parse_wav(std::span<const std::byte> bytes, const WavLoadOptions& options = {});

/// Integer encodings clamp to the representable range.
std::vector<std::byte> encode_wav(std::span<const float> samples, int sample_rate_hz,
                                  WavEncoding encoding = WavEncoding::float32);
void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate_hz, WavEncoding encoding = WavEncoding::float32);

}  // namespace maduv
