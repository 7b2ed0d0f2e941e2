#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace maduv {

enum class Sex : std::uint8_t { male, female };
enum class Label : std::uint8_t { wild_type = 0, asd = 1 };  // ASD is the positive class
enum class Split : std::uint8_t { train, valid, test, unassigned };

std::string_view to_string(Sex sex);
std::string_view to_string(Label label);
std::string_view to_string(Split split);
std::optional<Sex> parse_sex(std::string_view token);
std::optional<Label> parse_label(std::string_view token);
std::optional<Split> parse_split(std::string_view token);

struct SubjectRecord {
  std::string subject_id;
  Sex sex = Sex::male;
  Label label = Label::wild_type;
  int postnatal_day = 8;
  std::string audio_path;
  Split split = Split::unassigned;

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

struct Manifest {
  static constexpr int kSchemaVersion = 1;

  std::vector<SubjectRecord> records;
  int schema_version = kSchemaVersion;

  const SubjectRecord* find(std::string_view subject_id) const;
  std::size_t count(Split split) const;
  std::size_t count(Split split, Label label) const;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline constexpr std::string_view kManifestHeader =
    "subject_id,sex,label,postnatal_day,audio_path,split";

/// Parses manifest CSV text. Throws DataError on malformed input.
Manifest parse_manifest(std::string_view text);
std::string serialize_manifest(const Manifest& manifest);

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Throws DataError naming the first record whose audio is missing.
/// Relative audio paths are resolved against base_dir.
void validate_audio_paths(const Manifest& manifest, const std::filesystem::path& base_dir);

struct SplitRatios {
  double train = 0.6;
  double valid = 0.2;
  double test = 0.2;
};

struct SplitResult {
  Manifest manifest;
  std::vector<std::string> warnings;
};

/// Subject-level stratified partition over (label, sex) strata.
///
/// Every (stratum, split) count is floor or ceil of ratio * stratum size.
/// Within that, split sizes prefer the test-first allocation of the challenge
/// data (test then valid, each floor(ratio * pool)) and per-split class counts
/// follow the split size; when no table meets all of these, split sizes fall
/// back to floor/ceil of ratio * n and a warning is recorded. Members of a
/// stratum are shuffled with a seeded generator before being dealt, so the
/// result depends only on (records, ratios, seed).
SplitResult stratified_split(const Manifest& manifest, const SplitRatios& ratios,
                             std::uint64_t seed);

}  // namespace maduv
