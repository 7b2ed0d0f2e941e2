#include "maduv/manifest.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "maduv/error.hpp"
#include "maduv/rng.hpp"

namespace maduv {
namespace {

std::string row(int i, std::string_view sex, std::string_view label, std::string_view split = "") {
  char id[16];
  std::snprintf(id, sizeof(id), "M%03d", i);
  return std::string(id) + "," + std::string(sex) + "," + std::string(label) + ",8,audio/" + id + ".wav," +
         std::string(split) + "\n";
}

// 84-subject challenge composition: 30 wild male, 14 wild female, 27 ASD male, 13 ASD female.
Manifest challenge_cohort() {
  std::string text = std::string(kManifestHeader) + "\n";
  int i = 0;
  const std::array<std::tuple<int, const char*, const char*>, 4> strata = {
      {{30, "male", "wild_type"}, {14, "female", "wild_type"}, {27, "male", "asd"}, {13, "female", "asd"}}};
  for (const auto& [n, sex, label] : strata) {
    for (int k = 0; k < n; ++k) text += row(i++, sex, label);
  }
  return parse_manifest(text);
}

Manifest random_cohort(Rng& rng, std::size_t n) {
  Manifest m;
  for (std::size_t i = 0; i < n; ++i) {
    SubjectRecord r;
    r.subject_id = "R" + std::to_string(rng.below(1'000'000)) + "_" + std::to_string(i);
    r.sex = rng.uniform() < 0.6 ? Sex::male : Sex::female;
    r.label = rng.uniform() < 0.5 ? Label::asd : Label::wild_type;
    r.audio_path = r.subject_id + ".wav";
    m.records.push_back(r);
  }
  return m;
}

TEST(Manifest, ParsesChallengeCohort) {
  const Manifest m = challenge_cohort();
  ASSERT_EQ(m.records.size(), 84u);
  EXPECT_EQ(m.records[0].subject_id, "M000");
  EXPECT_EQ(m.records[0].postnatal_day, 8);
  EXPECT_EQ(m.records[83].label, Label::asd);
  EXPECT_EQ(m.records[83].sex, Sex::female);
}

TEST(Manifest, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(parse_manifest(std::string(kManifestHeader) + "\n").records.empty());
}

TEST(Manifest, RejectsBadInput) {
  const std::string h = std::string(kManifestHeader) + "\n";
  try {
    parse_manifest(h + row(1, "male", "healthy"));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown label token"), std::string::npos);
  }
  EXPECT_THROW(parse_manifest(h + row(1, "other", "asd")), DataError);
  EXPECT_THROW(parse_manifest(h + row(1, "male", "asd") + row(1, "female", "asd")), DataError);
  EXPECT_THROW(parse_manifest(h + "M1,male,asd,8\n"), DataError);
  EXPECT_THROW(parse_manifest(h + "M1,male,asd,eight,a.wav,\n"), DataError);
  EXPECT_THROW(parse_manifest(h + row(1, "male", "asd", "holdout")), DataError);
  EXPECT_THROW(parse_manifest("id,sex\n"), DataError);
  EXPECT_THROW(parse_manifest(""), DataError);
}

TEST(Manifest, SerializeParseRoundTrip) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Manifest m = random_cohort(rng, rng.below(40));
    for (auto& r : m.records) r.split = static_cast<Split>(rng.below(4));
    EXPECT_EQ(parse_manifest(serialize_manifest(m)), m);
  }
}

TEST(Manifest, SaveLoadAndAudioValidation) {
  const auto dir = std::filesystem::temp_directory_path() / "maduv_manifest_test";
  std::filesystem::create_directories(dir);
  Manifest m;
  m.records.push_back({"A", Sex::male, Label::asd, 8, "a.wav", Split::unassigned});
  save_manifest(dir / "m.csv", m);
  EXPECT_EQ(load_manifest(dir / "m.csv"), m);
  EXPECT_THROW(validate_audio_paths(m, dir), DataError);
  std::FILE* f = std::fopen((dir / "a.wav").c_str(), "wb");
  std::fclose(f);
  EXPECT_NO_THROW(validate_audio_paths(m, dir));
  std::filesystem::remove_all(dir);
}

std::array<std::array<std::size_t, 3>, 4> stratum_counts(const Manifest& m) {
  std::array<std::array<std::size_t, 3>, 4> c{};
  for (const auto& r : m.records) {
    const std::size_t s = static_cast<std::size_t>(r.label) * 2 + static_cast<std::size_t>(r.sex);
    c[s][static_cast<std::size_t>(r.split)]++;
  }
  return c;
}

TEST(StratifiedSplit, ReproducesChallengeCounts) {
  const Manifest m = challenge_cohort();
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 12345ull}) {
    const SplitResult r = stratified_split(m, {0.6, 0.2, 0.2}, seed);
    EXPECT_TRUE(r.warnings.empty());
    EXPECT_EQ(r.manifest.count(Split::train), 51u);
    EXPECT_EQ(r.manifest.count(Split::valid), 17u);
    EXPECT_EQ(r.manifest.count(Split::test), 16u);
    EXPECT_EQ(r.manifest.count(Split::train, Label::asd), 24u);
    EXPECT_EQ(r.manifest.count(Split::valid, Label::asd), 8u);
    EXPECT_EQ(r.manifest.count(Split::test, Label::asd), 8u);
  }
}

TEST(StratifiedSplit, DegenerateRatiosAssignEverythingToTrain) {
  const SplitResult r = stratified_split(challenge_cohort(), {1.0, 0.0, 0.0}, 3);
  EXPECT_EQ(r.manifest.count(Split::train), 84u);
}

TEST(StratifiedSplit, DeterministicAndSeedSensitive) {
  const Manifest m = challenge_cohort();
  const auto a = serialize_manifest(stratified_split(m, {0.6, 0.2, 0.2}, 9).manifest);
  EXPECT_EQ(a, serialize_manifest(stratified_split(m, {0.6, 0.2, 0.2}, 9).manifest));
  EXPECT_NE(a, serialize_manifest(stratified_split(m, {0.6, 0.2, 0.2}, 10).manifest));
}

TEST(StratifiedSplit, RejectsRatiosNotSummingToOne) {
  EXPECT_THROW(stratified_split(challenge_cohort(), {0.6, 0.2, 0.3}, 0), UsageError);
  EXPECT_THROW(stratified_split(challenge_cohort(), {1.2, -0.2, 0.0}, 0), UsageError);
}

TEST(StratifiedSplit, TinyStratumWarnsButSucceeds) {
  Manifest m;
  m.records.push_back({"a", Sex::male, Label::asd, 8, "a.wav", Split::unassigned});
  m.records.push_back({"b", Sex::male, Label::wild_type, 8, "b.wav", Split::unassigned});
  m.records.push_back({"c", Sex::male, Label::wild_type, 8, "c.wav", Split::unassigned});
  m.records.push_back({"d", Sex::female, Label::wild_type, 8, "d.wav", Split::unassigned});
  const SplitResult r = stratified_split(m, {0.6, 0.2, 0.2}, 0);
  EXPECT_FALSE(r.warnings.empty());
  for (const auto& rec : r.manifest.records) EXPECT_NE(rec.split, Split::unassigned);
}

TEST(StratifiedSplit, InputOrderDoesNotMatter) {
  Manifest m = challenge_cohort();
  const auto a = stratified_split(m, {0.6, 0.2, 0.2}, 5).manifest;
  std::reverse(m.records.begin(), m.records.end());
  const auto b = stratified_split(m, {0.6, 0.2, 0.2}, 5).manifest;
  for (const auto& r : a.records) EXPECT_EQ(b.find(r.subject_id)->split, r.split) << r.subject_id;
}

// Per-stratum counts stay within one of ratio * stratum size, and class
// balance per split stays within 1 / (smallest split).
TEST(StratifiedSplit, PropertySweep) {
  Rng rng(2024);
  const std::array<SplitRatios, 3> ratio_sets = {{{0.6, 0.2, 0.2}, {0.7, 0.15, 0.15}, {0.5, 0.25, 0.25}}};
  for (int trial = 0; trial < 300; ++trial) {
    const Manifest m = random_cohort(rng, 12 + rng.below(200));
    const SplitRatios ratios = ratio_sets[trial % 3];
    const SplitResult r = stratified_split(m, ratios, rng.next_u64());
    const auto c = stratum_counts(r.manifest);
    const double w[3] = {ratios.train, ratios.valid, ratios.test};
    for (std::size_t s = 0; s < 4; ++s) {
      const double size = static_cast<double>(c[s][0] + c[s][1] + c[s][2]);
      for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_LE(std::abs(static_cast<double>(c[s][k]) - w[k] * size), 1.0 + 1e-9)
            << "trial " << trial << " stratum " << s << " split " << k;
      }
    }
    std::size_t total_asd = 0;
    for (const auto& rec : m.records) total_asd += rec.label == Label::asd;
    const double frac = static_cast<double>(total_asd) / m.records.size();
    std::size_t min_split = m.records.size();
    for (Split sp : {Split::train, Split::valid, Split::test}) min_split = std::min(min_split, r.manifest.count(sp));
    ASSERT_GT(min_split, 0u);
    for (Split sp : {Split::train, Split::valid, Split::test}) {
      const double f = static_cast<double>(r.manifest.count(sp, Label::asd)) / r.manifest.count(sp);
      EXPECT_LE(std::abs(f - frac), 1.0 / min_split + 1e-12) << "trial " << trial;
    }
    for (const auto& rec : r.manifest.records) {
      EXPECT_NE(rec.split, Split::unassigned);
      const auto* orig = m.find(rec.subject_id);
      ASSERT_NE(orig, nullptr);
      EXPECT_EQ(orig->label, rec.label);
    }
  }
}

}  // namespace
}  // namespace maduv
