#include "maduv/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maduv/error.hpp"
#include "maduv/metrics.hpp"
#include "maduv/nn/layers.hpp"
#include "maduv/rng.hpp"

namespace maduv {

std::vector<double> ThresholdGrid::values() const {
  if (!(step > 0.0) || hi < lo) throw UsageError("threshold grid requires step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Snap to 1e-9 so that 0.1 + 3 * 0.05 prints and compares as 0.25.
    out[i] = std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9;
  }
  return out;
}

void TrainConfig::validate() const {
  if (epochs <= 0) throw UsageError("epochs must be positive");
  if (batch_size <= 0) throw UsageError("batch_size must be positive");
  if (!(adam.lr > 0.0)) throw UsageError("learning rate must be positive");
  if (seeds.empty()) throw UsageError("seed list must not be empty");
  for (double t : threshold_grid.values()) {
    if (!(t > 0.0 && t < 1.0)) throw UsageError("thresholds must lie in (0, 1)");
  }
  architecture.validate();
}

void LabeledSet::push_back(FeatureMatrix fm, std::uint8_t label, std::string subject_id) {
  features.push_back(std::move(fm));
  labels.push_back(label);
  subject_ids.push_back(std::move(subject_id));
}

ThresholdChoice threshold_search(std::span<const double> probabilities, std::span<const std::uint8_t> labels,
                                 const ThresholdGrid& grid) {
  if (probabilities.size() != labels.size() || labels.empty()) {
    throw DataError("threshold search needs equally many probabilities and labels (> 0)");
  }
  ThresholdChoice best{0.0, -1.0};
  std::vector<std::uint8_t> predicted(labels.size());
  for (double t : grid.values()) {
    for (std::size_t i = 0; i < labels.size(); ++i) predicted[i] = probabilities[i] >= t ? 1 : 0;
    const double u = uar_lenient(predicted, labels);
    if (u > best.uar) best = {t, u};
  }
  return best;
}

std::vector<double> predict_probabilities(const nn::ModelParams& params, std::span<const FeatureMatrix> features) {
  std::vector<double> probs;
  probs.reserve(features.size());
  for (const auto& fm : features) {
    const float logit = nn::forward_one<float>(params, fm.values);
    if (!std::isfinite(logit)) throw NumericError("non-finite logit for clip '" + fm.clip_id + "'");
    probs.push_back(nn::sigmoid(static_cast<double>(logit)));
  }
  return probs;
}

SetScores evaluate_probabilities(std::span<const double> probabilities, const LabeledSet& set, double threshold) {
  std::vector<ClipPrediction> clips;
  std::vector<std::uint8_t> predicted;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::uint8_t label = probabilities[i] >= threshold ? 1 : 0;
    predicted.push_back(label);
    clips.push_back({set.features[i].clip_id, set.subject_ids[i], probabilities[i], label});
  }
  SetScores scores;
  scores.segment_uar = uar_lenient(predicted, set.labels);

  std::map<std::string, std::uint8_t, std::less<>> subject_label;
  for (std::size_t i = 0; i < set.size(); ++i) subject_label[set.subject_ids[i]] = set.labels[i];
  const auto subjects = majority_vote(clips, threshold);
  std::vector<std::uint8_t> sp, st;
  for (const auto& s : subjects) {
    sp.push_back(s.label);
    st.push_back(subject_label.at(s.subject_id));
  }
  scores.subject_uar = uar_lenient(sp, st);
  return scores;
}

SetScores evaluate(const nn::ModelParams& params, const LabeledSet& set, double threshold) {
  return evaluate_probabilities(predict_probabilities(params, set.features), set, threshold);
}

namespace {

void check_set(const LabeledSet& set, const TrainConfig& config, const char* name) {
  if (set.labels.size() != set.size() || set.subject_ids.size() != set.size()) {
    throw UsageError(std::string(name) + " set: features, labels and subjects differ in length");
  }
  const auto& a = config.architecture;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& fm = set.features[i];
    if (fm.n_frames != a.in_height || fm.n_bins != a.in_width || fm.values.size() != fm.n_frames * fm.n_bins) {
      throw DataError(std::string(name) + " clip '" + fm.clip_id + "' has shape [" + std::to_string(fm.n_frames) +
                      "," + std::to_string(fm.n_bins) + "], expected [" + std::to_string(a.in_height) + "," +
                      std::to_string(a.in_width) + "]");
    }
    if (fm.band != config.band) {
      throw DataError(std::string(name) + " clip '" + fm.clip_id + "' is band " + std::string(to_string(fm.band)) +
                      ", expected " + std::string(to_string(config.band)));
    }
    if (set.labels[i] > 1) throw DataError(std::string(name) + " label outside {0,1}");
  }
}

}  // namespace

TrainResult train_one_seed(const TrainConfig& config, const LabeledSet& train, const LabeledSet& valid,
                           std::uint64_t seed) {
  config.validate();
  if (train.size() == 0) throw DataError("empty training set");
  if (valid.size() == 0) throw DataError("empty validation set");
  check_set(train, config, "training");
  check_set(valid, config, "validation");

  const auto& arch = config.architecture;
  nn::ModelParams params = nn::init_params(arch, derive_seed(seed, 1));
  nn::AdamState adam = nn::AdamState::for_params(params, config.adam);
  Rng order_rng(derive_seed(seed, 2));

  TrainResult result;
  result.params = params;
  result.selection.seed = seed;
  double best_uar = -1.0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t sample_size = std::size_t{arch.in_height} * arch.in_width;
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t b = std::min(batch_size, order.size() - start);
      nn::Tensor<float> batch({b, 1, arch.in_height, arch.in_width});
      std::vector<float> labels(b);
      for (std::size_t j = 0; j < b; ++j) {
        const std::size_t idx = order[start + j];
        std::copy_n(train.features[idx].values.begin(), sample_size, batch.slice(j).begin());
        labels[j] = static_cast<float>(train.labels[idx]);
      }
      const auto lg = nn::backward<float>(params, batch, labels);
      if (!std::isfinite(lg.loss)) throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      loss_sum += lg.loss * static_cast<double>(b);
      nn::adam_step(params, lg.grads, adam);
    }

    const auto probs = predict_probabilities(params, valid.features);
    const auto choice = threshold_search(probs, valid.labels, config.threshold_grid);
    result.history.push_back({epoch, loss_sum / static_cast<double>(train.size()), choice.uar, choice.threshold});
    if (choice.uar > best_uar) {
      best_uar = choice.uar;
      result.params = params;
      result.selection.epoch = epoch;
      result.selection.threshold = choice.threshold;
      result.selection.valid_segment_uar = choice.uar;
      result.selection.valid_subject_uar = evaluate_probabilities(probs, valid, choice.threshold).subject_uar;
    }
  }
  return result;
}

void summarize(ExperimentSummary& summary) {
  if (summary.runs.empty()) throw UsageError("experiment has no runs");
  std::size_t best = 0;
  for (std::size_t i = 1; i < summary.runs.size(); ++i) {
    const auto& a = summary.runs[i].selection;
    const auto& b = summary.runs[best].selection;
    if (a.valid_segment_uar > b.valid_segment_uar ||
        (a.valid_segment_uar == b.valid_segment_uar && a.seed < b.seed)) {
      best = i;
    }
  }
  summary.best_index = best;
  std::vector<double> vs, vj, ts, tj;
  bool all_test = true;
  for (const auto& r : summary.runs) {
    vs.push_back(r.selection.valid_segment_uar);
    vj.push_back(r.selection.valid_subject_uar);
    if (r.test) {
      ts.push_back(r.test->segment_uar);
      tj.push_back(r.test->subject_uar);
    } else {
      all_test = false;
    }
  }
  summary.valid_segment = mean_std(vs);
  summary.valid_subject = mean_std(vj);
  if (all_test) {
    summary.test_segment = mean_std(ts);
    summary.test_subject = mean_std(tj);
  } else {
    summary.test_segment.reset();
    summary.test_subject.reset();
  }
}

ExperimentSummary run_experiment(const TrainConfig& config, LabeledSet train, LabeledSet valid,
                                 std::optional<LabeledSet> test) {
  config.validate();
  if (train.size() == 0) throw DataError("empty training set");

  ExperimentSummary summary;
  summary.band = config.band;
  const bool raw = std::all_of(train.features.begin(), train.features.end(),
                               [](const FeatureMatrix& fm) { return fm.normalization != Normalization::zscored; });
  if (raw) {
    summary.normalization = log_normalize(train.features);
    log_normalize(valid.features, summary.normalization);
    if (test) log_normalize(test->features, summary.normalization);
  }

  for (std::uint64_t seed : config.seeds) {
    TrainResult tr = train_one_seed(config, train, valid, seed);
    SeedRun run;
    run.selection = tr.selection;
    run.history = std::move(tr.history);
    if (test) {
      check_set(*test, config, "test");
      run.test = evaluate(tr.params, *test, tr.selection.threshold);
    }
    run.params = std::move(tr.params);
    summary.runs.push_back(std::move(run));
  }
  summarize(summary);
  return summary;
}

}  // namespace maduv
