#include "maduv/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

#include "maduv/error.hpp"
#include "maduv/rng.hpp"

namespace maduv {

void ClassProfile::validate() const {
  if (!(call_rate_hz >= 0.0)) throw UsageError("call rate must be >= 0");
  if (!(call_amplitude >= 0.0) || !(noise_floor_amplitude >= 0.0)) throw UsageError("amplitudes must be >= 0");
  if (!(call_duration_ms.lo_hz > 0.0) || call_duration_ms.hi_hz < call_duration_ms.lo_hz) {
    throw UsageError("call duration range must be positive and ordered");
  }
  if (chirp_slope_hz_per_s.hi_hz < chirp_slope_hz_per_s.lo_hz) throw UsageError("chirp slope range is reversed");
  if (!(bandwidth_hz >= 0.0)) throw UsageError("bandwidth must be >= 0");
  if (call_rate_hz > 0.0 && center_freq_hz.empty()) throw UsageError("calling profile needs a center frequency range");
  for (const auto& r : center_freq_hz) {
    if (r.lo_hz < 0.0 || r.hi_hz >= 150'000.0 || r.hi_hz < r.lo_hz) {
      throw UsageError("center frequencies must lie within [0, 150 kHz)");
    }
  }
}

ClassProfile default_wild_type_profile() {
  ClassProfile p;
  p.center_freq_hz = {{7'500.0, 8'500.0}};
  return p;
}

ClassProfile default_asd_profile() {
  ClassProfile p;
  p.center_freq_hz = {{11'500.0, 12'500.0}, {68'000.0, 72'000.0}};
  return p;
}

AudioBuffer generate_subject(const ClassProfile& profile, double duration_s, int sample_rate_hz,
                             std::uint64_t seed) {
  profile.validate();
  if (sample_rate_hz <= 0) throw UsageError("sample rate must be positive");
  if (!(duration_s >= 0.0)) throw UsageError("duration must be >= 0");
  const double scale = static_cast<double>(sample_rate_hz) / 300'000.0;
  const double nyquist = 0.5 * sample_rate_hz;
  for (const auto& r : profile.center_freq_hz) {
    if ((r.hi_hz + 0.5 * profile.bandwidth_hz) * scale >= nyquist) {
      throw UsageError("profile frequency " + std::to_string(r.hi_hz * scale) + " Hz reaches Nyquist (" +
                       std::to_string(nyquist) + " Hz)");
    }
  }

  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  std::vector<float> out(n);
  Rng noise(derive_seed(seed, 0));
  std::vector<double> acc(n);
  for (auto& v : acc) v = profile.noise_floor_amplitude * noise.normal();

  if (profile.call_rate_hz > 0.0 && profile.call_amplitude > 0.0) {
    Rng calls(derive_seed(seed, 1));
    double arrival = 0.0;
    double busy_until = 0.0;
    while (true) {
      arrival += calls.exponential(profile.call_rate_hz);
      if (arrival >= duration_s) break;
      const double dur =
          1e-3 * calls.uniform(profile.call_duration_ms.lo_hz, profile.call_duration_ms.hi_hz);
      const auto& family = profile.center_freq_hz[calls.below(profile.center_freq_hz.size())];
      const double fc = calls.uniform(family.lo_hz, family.hi_hz) * scale;
      double slope = calls.uniform(profile.chirp_slope_hz_per_s.lo_hz, profile.chirp_slope_hz_per_s.hi_hz) * scale;
      const double phase0 = calls.uniform(0.0, 2.0 * std::numbers::pi);
      if (arrival < busy_until || arrival + dur > duration_s) continue;  // overlapping or truncated call
      busy_until = arrival + dur;
      const double max_span = profile.bandwidth_hz * scale;
      if (std::abs(slope) * dur > max_span) slope = std::copysign(max_span / dur, slope);

      const auto first = static_cast<std::size_t>(std::ceil(arrival * sample_rate_hz));
      const auto count = static_cast<std::size_t>(dur * sample_rate_hz);
      for (std::size_t i = 0; i < count && first + i < n; ++i) {
        const double tau = static_cast<double>(first + i) / sample_rate_hz - arrival;
        const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * tau / dur);
        const double phase = 2.0 * std::numbers::pi * (fc * tau + 0.5 * slope * (tau * tau - dur * tau)) + phase0;
        acc[first + i] += profile.call_amplitude * env * std::sin(phase);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(std::clamp(acc[i], -1.0, 1.0));
  return AudioBuffer(sample_rate_hz, std::move(out));
}

SynthSpec SynthSpec::fast() {
  SynthSpec s;
  s.sample_rate_hz = 30'000;
  s.duration_s = 30.0;
  return s;
}

void SynthSpec::validate() const {
  if (n_subjects < 0) throw UsageError("subject count must be >= 0");
  if (asd_fraction < 0.0 || asd_fraction > 1.0) throw UsageError("class balance must lie in [0, 1]");
  if (male_fraction < 0.0 || male_fraction > 1.0) throw UsageError("male fraction must lie in [0, 1]");
  if (asd_fraction > 0.0 && asd_fraction < 1.0 && n_subjects < 2) {
    throw UsageError("a mixed-class dataset needs at least 2 subjects");
  }
  if (jobs < 1) throw UsageError("jobs must be >= 1");
  wild_type.validate();
  asd.validate();
}

Manifest generate_manifest(const SynthSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n_subjects);
  auto n_asd = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.asd_fraction));
  if (spec.asd_fraction > 0.0 && spec.asd_fraction < 1.0) n_asd = std::clamp<std::size_t>(n_asd, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, 0x1abe1));
  rng.shuffle(std::span(order));

  Manifest m;
  m.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "S%03zu", i);
    auto& r = m.records[i];
    r.subject_id = id;
    r.audio_path = std::string(id) + ".wav";
    r.postnatal_day = 8;
  }
  // Within each label, the first round(count * male_fraction) shuffled subjects are male.
  std::vector<std::size_t> asd(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_asd));
  std::vector<std::size_t> wild(order.begin() + static_cast<std::ptrdiff_t>(n_asd), order.end());
  for (auto* group : {&wild, &asd}) {
    const auto males = static_cast<std::size_t>(std::llround(static_cast<double>(group->size()) * spec.male_fraction));
    for (std::size_t k = 0; k < group->size(); ++k) {
      auto& r = m.records[(*group)[k]];
      r.label = group == &asd ? Label::asd : Label::wild_type;
      r.sex = k < males ? Sex::male : Sex::female;
    }
  }
  return m;
}

AudioBuffer generate_record_audio(const SynthSpec& spec, const Manifest& manifest, std::size_t index) {
  const auto& r = manifest.records.at(index);
  const ClassProfile& profile = r.label == Label::asd ? spec.asd : spec.wild_type;
  return generate_subject(profile, spec.duration_s, spec.sample_rate_hz, derive_seed(spec.seed, 1000 + index));
}

Manifest generate_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  Manifest m = generate_manifest(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw DataError("unwritable directory: " + out_dir.string());
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= m.records.size()) return;
      try {
        const AudioBuffer audio = generate_record_audio(spec, m, i);
        write_wav(out_dir / m.records[i].audio_path, audio.samples(), audio.sample_rate_hz(), spec.encoding);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = m.records.size();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int j = 1; j < spec.jobs; ++j) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  save_manifest(out_dir / "manifest.csv", m);
  return m;
}

}  // namespace maduv
