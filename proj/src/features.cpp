#include "maduv/features.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include "maduv/binary_io.hpp"
#include "maduv/error.hpp"
#include "maduv/fft.hpp"
#include "maduv/simd/kernels.hpp"

namespace maduv {

Spectrogram::Spectrogram(std::size_t n_bins, std::size_t n_frames, double freq_resolution_hz,
                         double frame_hop_s, double first_bin_hz)
    : n_bins_(n_bins),
      n_frames_(n_frames),
      freq_resolution_hz_(freq_resolution_hz),
      frame_hop_s_(frame_hop_s),
      first_bin_hz_(first_bin_hz),
      values_(n_bins * n_frames, 0.0f) {}

std::string_view to_string(BandKind kind) {
  switch (kind) {
    case BandKind::full: return "full";
    case BandKind::audible: return "audible";
    case BandKind::ultrasonic: return "ultrasonic";
  }
  return "full";
}

std::optional<BandKind> parse_band_kind(std::string_view token) {
  if (token == "full") return BandKind::full;
  if (token == "audible" || token == "audi") return BandKind::audible;
  if (token == "ultrasonic" || token == "ultra") return BandKind::ultrasonic;
  return std::nullopt;
}

Band Band::make(BandKind kind, int sample_rate_hz) {
  const double scale = static_cast<double>(sample_rate_hz) / 300'000.0;
  const double split = 20'000.0 * scale;
  const double top = 150'000.0 * scale;
  switch (kind) {
    case BandKind::audible: return {kind, 0.0, split};
    case BandKind::ultrasonic: return {kind, split, top};
    case BandKind::full: break;
  }
  return {BandKind::full, 0.0, top};
}

StftParams StftParams::for_sample_rate(int sample_rate_hz) {
  const auto rate = static_cast<std::size_t>(sample_rate_hz);
  return {rate, rate, rate / 2};
}

Spectrogram stft_power(std::span<const float> samples, int sample_rate_hz, const StftParams& params) {
  if (params.window_len == 0 || params.hop == 0 || params.window_len > params.nfft) {
    throw UsageError("STFT requires 0 < window_len <= nfft and hop > 0");
  }
  if (samples.size() < params.window_len) {
    throw DataError("audio shorter than one STFT window (" + std::to_string(samples.size()) + " < " +
                    std::to_string(params.window_len) + " samples)");
  }
  const std::size_t n_frames = (samples.size() - params.window_len) / params.hop + 1;
  const auto plan = real_fft_plan(params.nfft);
  Spectrogram spec(plan->bins(), n_frames, static_cast<double>(sample_rate_hz) / params.nfft,
                   static_cast<double>(params.hop) / sample_rate_hz);

  std::vector<double> window(params.window_len);
  for (std::size_t i = 0; i < window.size(); ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(params.window_len));
  }

  const auto& k = simd::active();
  std::vector<double> frame(params.nfft, 0.0);
  std::vector<cdouble> spectrum(plan->bins());
  for (std::size_t f = 0; f < n_frames; ++f) {
    k.apply_window(samples.data() + f * params.hop, window.data(), frame.data(), params.window_len);
    plan->transform(frame, spectrum);
    k.power_spectrum(spectrum.data(), spec.frame(f).data(), spectrum.size());
  }
  return spec;
}

Spectrogram band_slice(const Spectrogram& spec, const Band& band) {
  const double res = spec.freq_resolution_hz();
  const double eps = 1e-9 * res;
  if (!(band.hi_hz > band.lo_hz)) throw DataError("empty band");
  const double nyquist = spec.bin_frequency(spec.n_bins() - 1);
  if (band.lo_hz < spec.first_bin_hz() - eps || band.hi_hz > nyquist + eps) {
    throw DataError("band [" + std::to_string(band.lo_hz) + ", " + std::to_string(band.hi_hz) +
                    ") outside spectrogram range");
  }
  std::size_t first = spec.n_bins();
  std::size_t last = 0;
  for (std::size_t b = 0; b < spec.n_bins(); ++b) {
    const double f = spec.bin_frequency(b);
    if (f >= band.lo_hz - eps && f < band.hi_hz - eps) {
      first = std::min(first, b);
      last = b + 1;
    }
  }
  if (first >= last) throw DataError("empty band");
  Spectrogram out(last - first, spec.n_frames(), res, spec.frame_hop_s(), spec.bin_frequency(first));
  for (std::size_t f = 0; f < spec.n_frames(); ++f) {
    const auto src = spec.frame(f).subspan(first, last - first);
    std::copy(src.begin(), src.end(), out.frame(f).begin());
  }
  return out;
}

FeatureMatrix bin_average(const Spectrogram& spec, BandKind band, std::size_t target_bins) {
  if (target_bins == 0 || spec.n_bins() % target_bins != 0) {
    throw DataError("non-divisible bin count: " + std::to_string(spec.n_bins()) + " rows into " +
                    std::to_string(target_bins) + " bins");
  }
  const std::size_t group = spec.n_bins() / target_bins;
  FeatureMatrix fm;
  fm.band = band;
  fm.n_frames = spec.n_frames();
  fm.n_bins = target_bins;
  fm.values.resize(fm.n_frames * fm.n_bins);
  const auto& k = simd::active();
  for (std::size_t f = 0; f < spec.n_frames(); ++f) {
    const float* row = spec.frame(f).data();
    for (std::size_t b = 0; b < target_bins; ++b) {
      fm.values[f * target_bins + b] = static_cast<float>(k.sum(row + b * group, group) / group);
    }
  }
  return fm;
}

void log_compress(FeatureMatrix& fm) {
  if (fm.normalization != Normalization::linear_power) {
    throw UsageError("log compression expects linear power features");
  }
  for (float& v : fm.values) {
    if (!(v >= 0.0f)) throw DataError("negative or non-finite power value");
    v = static_cast<float>(std::log10(static_cast<double>(v) + kLogFloor));
  }
  fm.normalization = Normalization::raw_log;
}

NormalizationStats compute_stats(std::span<const FeatureMatrix> batch) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& fm : batch) {
    if (fm.normalization != Normalization::raw_log) throw UsageError("statistics require log features");
    for (float v : fm.values) sum += v;
    count += fm.values.size();
  }
  if (count == 0) throw DataError("cannot compute normalization statistics of an empty batch");
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (const auto& fm : batch) {
    for (float v : fm.values) sq += (v - mean) * (v - mean);
  }
  const double std = std::sqrt(sq / static_cast<double>(count));
  if (!(std > 0.0)) throw NumericError("feature standard deviation is zero (constant features)");
  return {mean, std};
}

void apply_zscore(FeatureMatrix& fm, const NormalizationStats& stats) {
  if (fm.normalization != Normalization::raw_log) throw UsageError("z-scoring expects log features");
  if (!(stats.std > 0.0)) throw NumericError("normalization std must be positive");
  for (float& v : fm.values) v = static_cast<float>((v - stats.mean) / stats.std);
  fm.normalization = Normalization::zscored;
}

void invert_zscore(FeatureMatrix& fm, const NormalizationStats& stats) {
  if (fm.normalization != Normalization::zscored) throw UsageError("features are not z-scored");
  for (float& v : fm.values) v = static_cast<float>(v * stats.std + stats.mean);
  fm.normalization = Normalization::raw_log;
}

NormalizationStats log_normalize(std::span<FeatureMatrix> batch,
                                 const std::optional<NormalizationStats>& stats) {
  for (auto& fm : batch) {
    if (fm.normalization == Normalization::linear_power) log_compress(fm);
  }
  const NormalizationStats used = stats ? *stats : compute_stats(batch);
  for (auto& fm : batch) apply_zscore(fm, used);
  return used;
}

FeatureMatrix extract_features(std::span<const float> samples, int sample_rate_hz,
                               const FeatureConfig& config, std::string clip_id) {
  const Spectrogram spec = stft_power(samples, sample_rate_hz, StftParams::for_sample_rate(sample_rate_hz));
  FeatureMatrix fm = bin_average(band_slice(spec, Band::make(config.band, sample_rate_hz)), config.band,
                                 config.target_bins);
  fm.clip_id = std::move(clip_id);
  log_compress(fm);
  return fm;
}

std::vector<std::byte> encode_features(const FeatureMatrix& fm) {
  if (fm.values.size() != fm.n_frames * fm.n_bins) throw DataError("feature matrix shape mismatch");
  if (fm.clip_id.size() > 0xFFFF) throw DataError("clip id too long");
  io::ByteWriter w;
  w.put_bytes("MDVF");
  w.put<std::uint32_t>(kFeatureFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(fm.n_frames));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(fm.n_bins));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(fm.band));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(fm.normalization));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(fm.clip_id.size()));
  w.put_bytes(fm.clip_id);
  w.put_array(std::span<const float>(fm.values));
  return std::move(w.bytes());
}

FeatureMatrix decode_features(std::span<const std::byte> bytes) {
  io::ByteReader r(bytes);
  if (r.get_string(4, "header") != "MDVF") throw DataError("bad magic (not an MDVF feature file)");
  const auto version = r.get<std::uint32_t>("header");
  if (version != kFeatureFormatVersion) {
    throw DataError("version mismatch: feature file v" + std::to_string(version));
  }
  FeatureMatrix fm;
  fm.n_frames = r.get<std::uint32_t>("header");
  fm.n_bins = r.get<std::uint32_t>("header");
  const auto band = r.get<std::uint8_t>("header");
  const auto norm = r.get<std::uint8_t>("header");
  if (band > 2) throw DataError("unknown band code " + std::to_string(band));
  if (norm > 2) throw DataError("unknown normalization code " + std::to_string(norm));
  fm.band = static_cast<BandKind>(band);
  fm.normalization = static_cast<Normalization>(norm);
  const auto id_len = r.get<std::uint16_t>("header");
  fm.clip_id = r.get_string(id_len, "header");
  const std::size_t expected = fm.n_frames * fm.n_bins * sizeof(float);
  if (r.remaining() < expected) {
    throw DataError("truncated payload: header declares [" + std::to_string(fm.n_frames) + "," +
                    std::to_string(fm.n_bins) + "], " + std::to_string(r.remaining() / sizeof(float)) +
                    " floats present");
  }
  if (r.remaining() > expected) throw DataError("shape mismatch: payload longer than header declares");
  fm.values.resize(fm.n_frames * fm.n_bins);
  std::memcpy(fm.values.data(), r.get_span(expected, "payload").data(), expected);
  return fm;
}

void write_features(const FeatureMatrix& fm, const std::filesystem::path& path) {
  io::write_file(path, encode_features(fm));
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  try {
    return decode_features(io::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string feature_filename(std::string_view clip_id, BandKind band) {
  return std::string(clip_id) + "." + std::string(to_string(band)) + ".mdvf";
}

}  // namespace maduv
