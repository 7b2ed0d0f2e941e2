#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maduv/manifest.hpp"
#include "maduv/segment.hpp"

namespace maduv {

/// Positive class = ASD (label 1).
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> truths);

/// Mean of the two per-class recalls. Throws DataError ("undefined recall")
/// when a class is absent from the truths.
double uar(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> truths);

/// Like uar(), but an absent class contributes recall 0 instead of throwing.
double uar_lenient(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> truths);

struct ClipPrediction {
  std::string clip_id;
  std::string subject_id;
  double probability = 0.0;
  std::uint8_t label = 0;
};

struct SubjectPrediction {
  std::string subject_id;
  std::uint8_t label = 0;
  std::size_t n_asd = 0;
  std::size_t n_wild = 0;
  double mean_probability = 0.0;
};

/// Per-subject majority over clip labels; an exact tie goes to ASD iff the
/// subject's mean probability >= threshold. Output is ordered by subject id.
std::vector<SubjectPrediction> majority_vote(std::span<const ClipPrediction> clips, double threshold);

/// Segment submission: anonymized clip id -> predicted label.
struct Submission {
  std::vector<std::pair<std::string, std::uint8_t>> entries;
};

/// CSV "anonymized_id,label" with label in {0,1}.
Submission parse_submission(std::string_view text);
std::string serialize_submission(const Submission& submission);

struct ScoreReport {
  double segment_uar = 0.0;
  double subject_uar = 0.0;
  std::vector<SubjectPrediction> subjects;
};

/// De-anonymizes the submission through the key, scores clips against their
/// subject's label, then majority-votes per subject (threshold 0.5 on the
/// hard labels for ties). Throws DataError for missing, unknown or duplicate ids.
ScoreReport score_submission(const Submission& submission, const ShuffleKey& key,
                             const std::map<std::string, Label, std::less<>>& subject_truth);

struct TeamScore {
  std::string team_id;
  double segment_uar = 0.0;
  double subject_uar = 0.0;
};

struct RankingEntry {
  std::string team_id;
  double segment_uar = 0.0;
  double subject_uar = 0.0;
  std::size_t segment_rank = 0;
  std::size_t subject_rank = 0;
  double average_rank = 0.0;
  std::size_t final_rank = 0;
};

/// Competition ranking ("1,2,2,4") per metric, averaged; ordered by average
/// rank with ties broken by segment rank, then by input order. Final ranks
/// are 1..n.
std::vector<RankingEntry> rank_teams(std::span<const TeamScore> teams);

}  // namespace maduv
