#include "maduv/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>
#include <sstream>

#include "maduv/error.hpp"

namespace maduv {

ConfusionCounts confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> truths) {
  if (predictions.size() != truths.size()) throw UsageError("predictions and truths differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const bool p = predictions[i] != 0;
    const bool t = truths[i] != 0;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double uar(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> truths) {
  const auto c = confusion(predictions, truths);
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0) throw DataError("undefined recall: a class is absent from the truths");
  const double recall_pos = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double recall_neg = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return 0.5 * (recall_pos + recall_neg);
}

double uar_lenient(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> truths) {
  const auto c = confusion(predictions, truths);
  const double recall_pos = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  const double recall_neg = c.tn + c.fp ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp) : 0.0;
  return 0.5 * (recall_pos + recall_neg);
}

std::vector<SubjectPrediction> majority_vote(std::span<const ClipPrediction> clips, double threshold) {
  std::map<std::string, SubjectPrediction> by_subject;
  for (const auto& c : clips) {
    if (c.subject_id.empty()) throw DataError("clip '" + c.clip_id + "' has no subject");
    auto& s = by_subject[c.subject_id];
    s.subject_id = c.subject_id;
    (c.label ? s.n_asd : s.n_wild) += 1;
    s.mean_probability += c.probability;
  }
  std::vector<SubjectPrediction> out;
  out.reserve(by_subject.size());
  for (auto& [id, s] : by_subject) {
    const std::size_t n = s.n_asd + s.n_wild;
    s.mean_probability /= static_cast<double>(n);
    if (s.n_asd != s.n_wild) {
      s.label = s.n_asd > s.n_wild ? 1 : 0;
    } else {
      s.label = s.mean_probability >= threshold ? 1 : 0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

Submission parse_submission(std::string_view text) {
  Submission sub;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw DataError("submission is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "anonymized_id,label") throw DataError("submission header must be 'anonymized_id,label'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw DataError("submission line " + std::to_string(line_no) + ": malformed row");
    }
    const std::string label = line.substr(comma + 1);
    if (label != "0" && label != "1") {
      throw DataError("submission line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    sub.entries.emplace_back(line.substr(0, comma), static_cast<std::uint8_t>(label == "1"));
  }
  return sub;
}

std::string serialize_submission(const Submission& submission) {
  std::ostringstream out;
  out << "anonymized_id,label\n";
  for (const auto& [id, label] : submission.entries) out << id << ',' << int{label} << '\n';
  return out.str();
}

ScoreReport score_submission(const Submission& submission, const ShuffleKey& key,
                             const std::map<std::string, Label, std::less<>>& subject_truth) {
  std::set<std::string_view> seen;
  std::vector<ClipPrediction> clips;
  std::vector<std::uint8_t> preds, truths;
  for (const auto& [anon, label] : submission.entries) {
    if (!seen.insert(anon).second) throw DataError("duplicate clip id '" + anon + "' in submission");
    const ShuffleKeyEntry* e = key.find(anon);
    if (!e) throw DataError("unknown clip id '" + anon + "' in submission");
    const auto truth = subject_truth.find(e->subject_id);
    if (truth == subject_truth.end()) throw DataError("no ground truth for subject '" + e->subject_id + "'");
    clips.push_back({e->clip_id, e->subject_id, static_cast<double>(label), label});
    preds.push_back(label);
    truths.push_back(truth->second == Label::asd ? 1 : 0);
  }
  if (seen.size() != key.entries.size()) {
    throw DataError("incomplete submission (" + std::to_string(seen.size()) + "/" +
                    std::to_string(key.entries.size()) + ")");
  }

  ScoreReport report;
  report.segment_uar = uar(preds, truths);
  report.subjects = majority_vote(clips, 0.5);
  std::vector<std::uint8_t> subject_preds, subject_truths;
  for (const auto& s : report.subjects) {
    subject_preds.push_back(s.label);
    subject_truths.push_back(subject_truth.at(s.subject_id) == Label::asd ? 1 : 0);
  }
  report.subject_uar = uar(subject_preds, subject_truths);
  return report;
}

namespace {

// Standard competition ranking, descending by value.
std::vector<std::size_t> competition_ranks(std::span<const double> values) {
  std::vector<std::size_t> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ranks[i] = 1 + static_cast<std::size_t>(
                       std::count_if(values.begin(), values.end(), [&](double v) { return v > values[i]; }));
  }
  return ranks;
}

}  // namespace

std::vector<RankingEntry> rank_teams(std::span<const TeamScore> teams) {
  std::vector<double> seg, subj;
  for (const auto& t : teams) {
    seg.push_back(t.segment_uar);
    subj.push_back(t.subject_uar);
  }
  const auto seg_rank = competition_ranks(seg);
  const auto subj_rank = competition_ranks(subj);
  std::vector<RankingEntry> out;
  for (std::size_t i = 0; i < teams.size(); ++i) {
    out.push_back({teams[i].team_id, teams[i].segment_uar, teams[i].subject_uar, seg_rank[i], subj_rank[i],
                   0.5 * static_cast<double>(seg_rank[i] + subj_rank[i]), 0});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankingEntry& a, const RankingEntry& b) {
    if (a.average_rank != b.average_rank) return a.average_rank < b.average_rank;
    return a.segment_rank < b.segment_rank;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].final_rank = i + 1;
  return out;
}

}  // namespace maduv
