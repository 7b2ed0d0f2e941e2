#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maduv/features.hpp"
#include "maduv/nn/adam.hpp"
#include "maduv/nn/model.hpp"
#include "maduv/stats.hpp"

namespace maduv {

struct ThresholdGrid {
  double lo = 0.10;
  double hi = 0.90;
  double step = 0.05;

  /// lo, lo + step, ..., hi (17 values for the defaults).
  std::vector<double> values() const;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  nn::AdamConfig adam;  // lr lives here
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  ThresholdGrid threshold_grid;
  BandKind band = BandKind::audible;
  nn::Architecture architecture;

  void validate() const;
};

/// Clip features with their labels (1 = ASD) and owning subjects.
struct LabeledSet {
  std::vector<FeatureMatrix> features;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> subject_ids;

  std::size_t size() const { return features.size(); }
  void push_back(FeatureMatrix fm, std::uint8_t label, std::string subject_id);
};

struct ThresholdChoice {
  double threshold = 0.5;
  double uar = 0.0;
};

/// Exhaustive search over the grid: predict 1 iff prob >= threshold; the
/// smallest maximizing threshold wins. A class absent from the labels
/// contributes recall 0.
ThresholdChoice threshold_search(std::span<const double> probabilities, std::span<const std::uint8_t> labels,
                                 const ThresholdGrid& grid = {});

struct CheckpointSelection {
  std::uint64_t seed = 0;
  int epoch = 0;
  double threshold = 0.5;
  double valid_segment_uar = 0.0;
  double valid_subject_uar = 0.0;

  friend bool operator==(const CheckpointSelection&, const CheckpointSelection&) = default;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double valid_uar = 0.0;
  double threshold = 0.5;
};

struct TrainResult {
  nn::ModelParams params;  // the retained (best-validation) checkpoint
  CheckpointSelection selection;
  std::vector<EpochRecord> history;
};

/// Sigmoid probabilities for each clip.
std::vector<double> predict_probabilities(const nn::ModelParams& params, std::span<const FeatureMatrix> features);

struct SetScores {
  double segment_uar = 0.0;
  double subject_uar = 0.0;
};

SetScores evaluate(const nn::ModelParams& params, const LabeledSet& set, double threshold);
SetScores evaluate_probabilities(std::span<const double> probabilities, const LabeledSet& set, double threshold);

/// Per epoch: seeded shuffle, minibatch Adam on BCE, then threshold search on
/// the validation clips; keeps the (epoch, threshold) with the highest
/// validation segment UAR (earliest epoch on ties).
TrainResult train_one_seed(const TrainConfig& config, const LabeledSet& train, const LabeledSet& valid,
                           std::uint64_t seed);

struct SeedRun {
  CheckpointSelection selection;
  std::optional<SetScores> test;
  std::vector<EpochRecord> history;
  nn::ModelParams params;
};

struct ExperimentSummary {
  BandKind band = BandKind::audible;
  NormalizationStats normalization;
  std::vector<SeedRun> runs;
  std::size_t best_index = 0;  // max validation segment UAR, ties to the lower seed
  MeanStd valid_segment, valid_subject;
  std::optional<MeanStd> test_segment, test_subject;
};

/// Z-scores every set with training statistics when they are still raw log
/// features, trains once per seed, and aggregates.
ExperimentSummary run_experiment(const TrainConfig& config, LabeledSet train, LabeledSet valid,
                                 std::optional<LabeledSet> test = std::nullopt);

/// Re-derives best_index and the aggregates from runs.
void summarize(ExperimentSummary& summary);

}  // namespace maduv
