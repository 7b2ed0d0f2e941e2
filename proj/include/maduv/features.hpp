#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maduv {

/// Power spectrogram. Stored frame-major (each frame's bins contiguous);
/// at(bin, frame) gives the [bins x frames] view.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t n_bins, std::size_t n_frames, double freq_resolution_hz, double frame_hop_s,
              double first_bin_hz = 0.0);

  std::size_t n_bins() const noexcept { return n_bins_; }
  std::size_t n_frames() const noexcept { return n_frames_; }
  double freq_resolution_hz() const noexcept { return freq_resolution_hz_; }
  double frame_hop_s() const noexcept { return frame_hop_s_; }
  double first_bin_hz() const noexcept { return first_bin_hz_; }
  double bin_frequency(std::size_t bin) const noexcept {
    return first_bin_hz_ + static_cast<double>(bin) * freq_resolution_hz_;
  }

  float at(std::size_t bin, std::size_t frame) const { return values_[frame * n_bins_ + bin]; }
  std::span<float> frame(std::size_t f) { return {values_.data() + f * n_bins_, n_bins_}; }
  std::span<const float> frame(std::size_t f) const { return {values_.data() + f * n_bins_, n_bins_}; }
  std::span<const float> values() const noexcept { return values_; }

 private:
  std::size_t n_bins_ = 0;
  std::size_t n_frames_ = 0;
  double freq_resolution_hz_ = 1.0;
  double frame_hop_s_ = 0.5;
  double first_bin_hz_ = 0.0;
  std::vector<float> values_;
};

enum class BandKind : std::uint8_t { full = 0, audible = 1, ultrasonic = 2 };

std::string_view to_string(BandKind kind);              // "full" / "audible" / "ultrasonic"
std::optional<BandKind> parse_band_kind(std::string_view token);  // also accepts "audi" / "ultra"

/// Half-open frequency interval [lo_hz, hi_hz).
struct Band {
  BandKind kind = BandKind::full;
  double lo_hz = 0.0;
  double hi_hz = 150'000.0;

  /// Challenge edges (20 kHz split, 150 kHz top) scaled by sample_rate / 300 kHz,
  /// so reduced-rate test data keeps the same band geometry.
  static Band make(BandKind kind, int sample_rate_hz = 300'000);
};

struct StftParams {
  std::size_t window_len = 300'000;
  std::size_t nfft = 300'000;
  std::size_t hop = 150'000;

  /// One-second window and FFT, half-second hop at the given rate.
  static StftParams for_sample_rate(int sample_rate_hz);
};

/// Hann window (periodic), real FFT, |X[k]|^2 per frame. No tail padding.
/// Throws DataError when the audio is shorter than one window.
Spectrogram stft_power(std::span<const float> samples, int sample_rate_hz, const StftParams& params = {});

/// Keeps bins whose frequency lies in [band.lo_hz, band.hi_hz).
Spectrogram band_slice(const Spectrogram& spec, const Band& band);

enum class Normalization : std::uint8_t { linear_power = 0, raw_log = 1, zscored = 2 };

/// [n_frames x n_bins] row-major, tagged with band and clip identity.
struct FeatureMatrix {
  BandKind band = BandKind::full;
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<float> values;
  std::string clip_id;
  Normalization normalization = Normalization::linear_power;

  float at(std::size_t frame, std::size_t bin) const { return values[frame * n_bins + bin]; }
  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// Averages contiguous groups of rows down to target_bins and transposes to
/// [frames x bins]. Throws DataError when n_bins is not divisible.
FeatureMatrix bin_average(const Spectrogram& spec, BandKind band, std::size_t target_bins = 500);

struct NormalizationStats {
  double mean = 0.0;
  double std = 1.0;
};

inline constexpr double kLogFloor = 1e-10;

/// log10(v + 1e-10); input must be linear power.
void log_compress(FeatureMatrix& fm);

/// Global mean and population std over every value in the batch (raw_log).
/// Throws NumericError when the std is zero.
NormalizationStats compute_stats(std::span<const FeatureMatrix> batch);
void apply_zscore(FeatureMatrix& fm, const NormalizationStats& stats);
void invert_zscore(FeatureMatrix& fm, const NormalizationStats& stats);

/// Log-compresses linear matrices, then z-scores the whole batch with the
/// given stats, or with stats computed from this batch when none are given.
NormalizationStats log_normalize(std::span<FeatureMatrix> batch,
                                 const std::optional<NormalizationStats>& stats = std::nullopt);

struct FeatureConfig {
  BandKind band = BandKind::audible;
  std::size_t target_bins = 500;
};

/// stft_power -> band_slice -> bin_average -> log_compress, with STFT
/// parameters scaled to the clip's sample rate.
FeatureMatrix extract_features(std::span<const float> samples, int sample_rate_hz,
                               const FeatureConfig& config, std::string clip_id);

// Binary format "MDVF" v1, little-endian:
//   char[4] magic, u32 version, u32 n_frames, u32 n_bins, u8 band,
//   u8 normalization, u16 clip_id length, clip_id bytes,
//   n_frames * n_bins f32 row-major.
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

std::vector<std::byte> encode_features(const FeatureMatrix& fm);
FeatureMatrix decode_features(std::span<const std::byte> bytes);
void write_features(const FeatureMatrix& fm, const std::filesystem::path& path);
FeatureMatrix read_features(const std::filesystem::path& path);

/// "{clip_id}.{band}.mdvf"
std::string feature_filename(std::string_view clip_id, BandKind band);

}  // namespace maduv
