#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maduv/audio.hpp"
#include "maduv/manifest.hpp"

namespace maduv {

/// A window into a shared recording. Slicing is exact: samples() returns the
/// source samples at [offset, offset + length) untouched.
struct Clip {
  std::string subject_id;
  std::string clip_id;
  double start_s = 0.0;
  double duration_s = 0.0;
  std::shared_ptr<const AudioBuffer> source;
  std::size_t offset = 0;
  std::size_t length = 0;
  std::optional<Label> inherited_label;

  std::span<const float> samples() const { return source->samples().subspan(offset, length); }
  int sample_rate_hz() const { return source->sample_rate_hz(); }
};

/// "{subject_id}__{index:03}"
std::string make_clip_id(std::string_view subject_id, std::size_t index);

/// Fixed-length windows anchored at t = 0; trailing audio shorter than one
/// window is dropped. Window and hop are rounded to whole samples.
std::vector<Clip> segment_overlapped(std::shared_ptr<const AudioBuffer> audio, std::string_view subject_id,
                                     std::optional<Label> label, double window_s = 30.0,
                                     double hop_s = 15.0);

std::vector<Clip> segment_nonoverlapped(std::shared_ptr<const AudioBuffer> audio,
                                        std::string_view subject_id, std::optional<Label> label,
                                        double window_s = 30.0);

struct ShuffleKeyEntry {
  std::string anonymized_id;
  std::string clip_id;
  std::string subject_id;
};

/// Secret bijection from anonymized ids back to clip and subject identity.
struct ShuffleKey {
  std::uint64_t seed = 0;
  std::vector<ShuffleKeyEntry> entries;  // ordered by anonymized id

  const ShuffleKeyEntry* find(std::string_view anonymized_id) const;
};

struct ShuffledClips {
  std::vector<Clip> clips;  // clip_id replaced by the anonymized id, subject and label stripped
  ShuffleKey key;
};

/// Seeded permutation of the clips with anonymized zero-padded ids.
/// Throws DataError on duplicate clip ids.
ShuffledClips shuffle_clips(std::span<const Clip> clips, std::uint64_t seed);

/// CSV "anonymized_id,clip_id,subject_id".
std::string serialize_shuffle_key(const ShuffleKey& key);
ShuffleKey parse_shuffle_key(std::string_view text);

/// One row of the on-disk clip table; test rows carry an anonymized clip id
/// and no subject or label.
struct ClipRecord {
  std::string clip_id;
  std::string subject_id;
  Split split = Split::unassigned;
  std::optional<Label> label;
  double start_s = 0.0;
  double duration_s = 0.0;
  std::string audio_path;  // relative to the table's directory

  friend bool operator==(const ClipRecord&, const ClipRecord&) = default;
};

inline constexpr std::string_view kClipTableHeader = "clip_id,subject_id,split,label,start_s,duration_s,audio_path";

std::string serialize_clip_table(std::span<const ClipRecord> rows);
std::vector<ClipRecord> parse_clip_table(std::string_view text);

}  // namespace maduv
