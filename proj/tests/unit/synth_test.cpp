#include "maduv/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "maduv/error.hpp"
#include "maduv/fft.hpp"

namespace maduv {
namespace {

// Energy of |X[k]|^2 over bins whose frequency lies in [lo, hi).
double band_energy(std::span<const double> x, int rate, double lo, double hi) {
  const auto spec = fft_real(x);
  double e = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * rate / static_cast<double>(x.size());
    if (f >= lo && f < hi) e += std::norm(spec[k]);
  }
  return e;
}

// Calls are additive over a noise floor drawn from an independent stream,
// so subtracting the call-free rendering of the same seed isolates them.
std::vector<double> calls_only(const ClassProfile& profile, double duration, int rate, std::uint64_t seed) {
  ClassProfile silent = profile;
  silent.call_rate_hz = 0.0;
  const auto with = generate_subject(profile, duration, rate, seed);
  const auto without = generate_subject(silent, duration, rate, seed);
  std::vector<double> d(with.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(with.samples()[i]) - without.samples()[i];
  return d;
}

TEST(Synth, UltrasonicProfilePutsEnergyInItsBand) {
  ClassProfile p;
  p.center_freq_hz = {{60'000.0, 80'000.0}};
  p.call_rate_hz = 10.0;
  const auto d = calls_only(p, 2.0, 300'000, 11);
  const double total = band_energy(d, 300'000, 0.0, 150'001.0);
  ASSERT_GT(total, 0.0);
  EXPECT_GE(band_energy(d, 300'000, 20'000.0, 150'001.0) / total, 0.9);
  EXPECT_GE(band_energy(d, 300'000, 55'000.0, 85'000.0) / total, 0.9);
}

TEST(Synth, FastRateScalesFrequencies) {
  ClassProfile p;
  p.center_freq_hz = {{60'000.0, 80'000.0}};
  p.call_rate_hz = 10.0;
  const auto d = calls_only(p, 2.0, 30'000, 12);
  const double total = band_energy(d, 30'000, 0.0, 15'001.0);
  EXPECT_GE(band_energy(d, 30'000, 5'500.0, 8'500.0) / total, 0.9);
}

TEST(Synth, ZeroCallRateIsPureNoise) {
  ClassProfile p = default_asd_profile();
  p.call_rate_hz = 0.0;
  const auto a = generate_subject(p, 1.0, 30'000, 5);
  double ss = 0.0;
  for (float v : a.samples()) ss += static_cast<double>(v) * v;
  const double sd = std::sqrt(ss / static_cast<double>(a.size()));
  EXPECT_NEAR(sd, p.noise_floor_amplitude, 0.05 * p.noise_floor_amplitude);
  // Noise depends only on the seed, not on the class profile.
  ClassProfile q = default_wild_type_profile();
  q.call_rate_hz = 0.0;
  EXPECT_EQ(generate_subject(q, 1.0, 30'000, 5).samples()[17], a.samples()[17]);
}

TEST(Synth, DeterministicBoundedAndSized) {
  const auto p = default_asd_profile();
  const auto a = generate_subject(p, 3.0, 30'000, 9);
  const auto b = generate_subject(p, 3.0, 30'000, 9);
  const auto c = generate_subject(p, 3.0, 30'000, 10);
  ASSERT_EQ(a.size(), 90'000u);
  EXPECT_EQ(a.sample_rate_hz(), 30'000);
  EXPECT_TRUE(std::equal(a.samples().begin(), a.samples().end(), b.samples().begin()));
  EXPECT_FALSE(std::equal(a.samples().begin(), a.samples().end(), c.samples().begin()));
  for (float v : a.samples()) {
    ASSERT_TRUE(std::isfinite(v));
    ASSERT_LE(std::abs(v), 1.0f);
  }
}

TEST(Synth, LouderCallsRaiseInBandEnergy) {
  ClassProfile p = default_wild_type_profile();
  p.noise_floor_amplitude = 0.0;
  p.call_amplitude = 0.1;
  const auto quiet = calls_only(p, 2.0, 30'000, 3);
  p.call_amplitude = 0.2;
  const auto loud = calls_only(p, 2.0, 30'000, 3);
  const double eq = band_energy(quiet, 30'000, 600.0, 1'000.0);
  const double el = band_energy(loud, 30'000, 600.0, 1'000.0);
  ASSERT_GT(eq, 0.0);
  EXPECT_NEAR(el / eq, 4.0, 1e-3);
}

TEST(Synth, RejectsFrequenciesAtNyquist) {
  ClassProfile p;
  p.center_freq_hz = {{140'000.0, 149'000.0}};
  EXPECT_THROW(generate_subject(p, 1.0, 300'000, 0), UsageError);
  p.center_freq_hz = {{140'000.0, 160'000.0}};
  EXPECT_THROW(generate_subject(p, 1.0, 300'000, 0), UsageError);
  EXPECT_THROW(generate_subject(default_asd_profile(), 1.0, 0, 0), UsageError);
}

TEST(Synth, ManifestBalanceAndDeterminism) {
  SynthSpec s = SynthSpec::fast();
  s.n_subjects = 40;
  const auto m = generate_manifest(s);
  ASSERT_EQ(m.records.size(), 40u);
  std::size_t asd = 0;
  for (const auto& r : m.records) asd += r.label == Label::asd;
  EXPECT_EQ(asd, 20u);
  EXPECT_EQ(generate_manifest(s).records, m.records);
  s.asd_fraction = 1.5;
  EXPECT_THROW(generate_manifest(s), UsageError);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Synth, ParallelGenerationIsByteIdentical) {
  const auto root = std::filesystem::temp_directory_path() / "maduv_synth_jobs";
  std::filesystem::remove_all(root);
  SynthSpec s = SynthSpec::fast();
  s.n_subjects = 6;
  s.duration_s = 2.0;
  s.seed = 21;
  const auto m1 = generate_dataset(s, root / "a");
  s.jobs = 3;
  const auto m2 = generate_dataset(s, root / "b");
  EXPECT_EQ(m1.records, m2.records);
  for (const auto& r : m1.records) {
    const auto a = slurp(root / "a" / r.audio_path);
    ASSERT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(root / "b" / r.audio_path)) << r.subject_id;
  }
  EXPECT_EQ(slurp(root / "a" / "manifest.csv"), slurp(root / "b" / "manifest.csv"));
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace maduv
