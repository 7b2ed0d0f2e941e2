#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "maduv/audio.hpp"
#include "maduv/manifest.hpp"

namespace maduv {

struct FrequencyRange {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

/// Class-dependent call statistics. Frequencies are nominal (300 kHz scale);
/// generation at a lower sample rate scales them by rate / 300 kHz.
struct ClassProfile {
  double call_rate_hz = 4.0;                      // Poisson rate of calls per second
  FrequencyRange call_duration_ms{20.0, 80.0};
  std::vector<FrequencyRange> center_freq_hz;     // one range per call family; a call picks one
  double bandwidth_hz = 4'000.0;                  // cap on a call's total sweep
  FrequencyRange chirp_slope_hz_per_s{-40'000.0, 40'000.0};
  double call_amplitude = 0.3;
  double noise_floor_amplitude = 0.01;            // std of the white-noise floor

  /// Throws UsageError when a center range is outside [0, 150 kHz) or amplitudes are negative.
  void validate() const;
};

/// Default presets: both classes call around 8 kHz (class 0) or 12 kHz
/// (class 1) in the audible band; class 1 adds 70 kHz ultrasonic bursts.
ClassProfile default_wild_type_profile();
ClassProfile default_asd_profile();

/// White noise plus Poisson-scheduled, non-overlapping linear chirps with Hann
/// envelopes, clipped to [-1, 1]. Deterministic in (profile, duration, rate, seed).
/// Throws UsageError when a call frequency would exceed Nyquist.
AudioBuffer generate_subject(const ClassProfile& profile, double duration_s, int sample_rate_hz,
                             std::uint64_t seed);

struct SynthSpec {
  int n_subjects = 40;
  double asd_fraction = 0.5;
  double male_fraction = 0.68;
  double duration_s = 300.0;
  int sample_rate_hz = kChallengeSampleRate;
  std::uint64_t seed = 0;
  ClassProfile wild_type = default_wild_type_profile();
  ClassProfile asd = default_asd_profile();
  WavEncoding encoding = WavEncoding::float32;
  int jobs = 1;

  /// 30 kHz, 30 s: the reduced-scale preset used in CI-speed runs.
  static SynthSpec fast();
  void validate() const;
};

/// Subject i gets seed derive_seed(spec.seed, i). Labels: the first
/// round(n * asd_fraction) subjects after a seeded shuffle are ASD.
Manifest generate_manifest(const SynthSpec& spec);

/// Writes "<subject_id>.wav" per subject and "manifest.csv" into out_dir.
/// Audio paths in the manifest are relative to out_dir.
Manifest generate_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// Audio of one manifest record, regenerated in memory.
AudioBuffer generate_record_audio(const SynthSpec& spec, const Manifest& manifest, std::size_t index);

}  // namespace maduv
