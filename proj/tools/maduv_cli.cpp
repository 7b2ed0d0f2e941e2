// maduv: command-line driver for the synthetic-data, feature, training and
// scoring pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
// Every error goes to stderr as a single "MADUV-ERR: ..." line.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maduv/audio.hpp"
#include "maduv/binary_io.hpp"
#include "maduv/config.hpp"
#include "maduv/error.hpp"
#include "maduv/features.hpp"
#include "maduv/manifest.hpp"
#include "maduv/metrics.hpp"
#include "maduv/nn/checkpoint.hpp"
#include "maduv/report.hpp"
#include "maduv/segment.hpp"
#include "maduv/stats.hpp"
#include "maduv/synth.hpp"
#include "maduv/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace maduv;

std::uint64_t default_seed() {
  const char* env = std::getenv("MADUV_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string_view(env).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("MADUV_SEED is not an unsigned integer: ") + env);
  }
}

void require_file(const fs::path& p, std::string_view what) {
  if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

void require_dir(const fs::path& p, std::string_view what) {
  if (!fs::is_directory(p)) throw UsageError(std::string(what) + " is not a directory: " + p.string());
}

BandKind band_option(const std::string& token) {
  const auto band = parse_band_kind(token);
  if (!band) throw UsageError("unknown band '" + token + "' (expected full, audi or ultra)");
  return *band;
}

std::map<std::string, Label, std::less<>> subject_truth(const Manifest& manifest) {
  std::map<std::string, Label, std::less<>> truth;
  for (const auto& r : manifest.records) truth.emplace(r.subject_id, r.label);
  return truth;
}

// Runs f(i) for i in [0, n) on up to `jobs` threads; the first exception wins.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (failure || next >= n) return;
            i = next++;
          }
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  fs::path out;
  std::optional<fs::path> config;
  bool fast = false;
  bool identical = false;
  std::optional<int> n_subjects;
  std::optional<double> duration_s;
  std::optional<int> sample_rate;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void run_synth(const SynthArgs& a) {
  SynthSpec spec = a.fast ? SynthSpec::fast() : SynthSpec{};
  spec.seed = default_seed();
  if (a.config) spec = synth_spec_from_json(load_json_file(*a.config), spec);
  if (a.n_subjects) spec.n_subjects = *a.n_subjects;
  if (a.duration_s) spec.duration_s = *a.duration_s;
  if (a.sample_rate) spec.sample_rate_hz = *a.sample_rate;
  if (a.seed) spec.seed = *a.seed;
  if (a.identical) spec.asd = spec.wild_type;
  spec.jobs = a.jobs;
  spec.validate();
  const Manifest m = generate_dataset(spec, a.out);
  std::cout << "wrote " << m.records.size() << " subjects to " << a.out.string() << '\n';
}

// ---- split -----------------------------------------------------------------

struct SplitArgs {
  fs::path manifest;
  fs::path out;
  std::vector<double> ratios{0.6, 0.2, 0.2};
  std::optional<std::uint64_t> seed;
};

void run_split(const SplitArgs& a) {
  require_file(a.manifest, "manifest");
  if (a.ratios.size() != 3) throw UsageError("--ratios needs three values: train,valid,test");
  const Manifest m = load_manifest(a.manifest);
  // Ratios are relative weights, so "40,14,14" means 40/68, 14/68, 14/68.
  const double total = a.ratios[0] + a.ratios[1] + a.ratios[2];
  if (!(total > 0.0) || a.ratios[0] < 0.0 || a.ratios[1] < 0.0 || a.ratios[2] < 0.0) {
    throw UsageError("--ratios must be non-negative with a positive sum");
  }
  const SplitRatios ratios{a.ratios[0] / total, a.ratios[1] / total, a.ratios[2] / total};
  const auto result = stratified_split(m, ratios, a.seed.value_or(default_seed()));
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  // Audio paths stay relative to the original manifest's directory.
  Manifest out = result.manifest;
  const fs::path from = a.manifest.parent_path(), to = a.out.parent_path();
  if (fs::absolute(from) != fs::absolute(to)) {
    for (auto& r : out.records) {
      r.audio_path = fs::relative(fs::absolute(from / r.audio_path), fs::absolute(to.empty() ? "." : to)).string();
    }
  }
  save_manifest(a.out, out);
  std::cout << "train " << out.count(Split::train) << ", valid " << out.count(Split::valid) << ", test "
            << out.count(Split::test) << '\n';
}

// ---- segment ---------------------------------------------------------------

struct SegmentArgs {
  fs::path manifest;
  fs::path out;
  std::optional<std::uint64_t> seed;
  int sample_rate = kChallengeSampleRate;
};

void run_segment(const SegmentArgs& a) {
  require_file(a.manifest, "manifest");
  const Manifest m = load_manifest(a.manifest);
  const fs::path base = a.manifest.parent_path();
  validate_audio_paths(m, base);
  for (const auto& r : m.records) {
    if (r.split == Split::unassigned) throw DataError("subject '" + r.subject_id + "' has no split; run split first");
  }
  WavLoadOptions load;
  if (a.sample_rate > 0) load.expected_sample_rate = a.sample_rate;
  else load.expected_sample_rate.reset();

  fs::create_directories(a.out / "clips");
  fs::create_directories(a.out / "test");
  std::vector<ClipRecord> rows;
  std::vector<Clip> test_clips;
  for (const auto& r : m.records) {
    auto audio = std::make_shared<const AudioBuffer>(load_wav(base / r.audio_path, load));
    if (r.split == Split::test) {
      for (auto& c : segment_nonoverlapped(audio, r.subject_id, r.label)) test_clips.push_back(std::move(c));
      continue;
    }
    for (const auto& c : segment_overlapped(audio, r.subject_id, r.label)) {
      const std::string rel = "clips/" + c.clip_id + ".wav";
      write_wav(a.out / rel, c.samples(), c.sample_rate_hz());
      rows.push_back({c.clip_id, c.subject_id, r.split, r.label, c.start_s, c.duration_s, rel});
    }
  }
  const ShuffledClips shuffled = shuffle_clips(test_clips, a.seed.value_or(default_seed()));
  for (const auto& c : shuffled.clips) {
    const std::string rel = "test/" + c.clip_id + ".wav";
    write_wav(a.out / rel, c.samples(), c.sample_rate_hz());
    rows.push_back({c.clip_id, "", Split::test, std::nullopt, 0.0, c.duration_s, rel});
  }
  io::write_text_file(a.out / "clips.csv", serialize_clip_table(rows));
  io::write_text_file(a.out / "shuffle_key.csv", serialize_shuffle_key(shuffled.key));
  std::cout << rows.size() - shuffled.clips.size() << " labeled clips, " << shuffled.clips.size()
            << " anonymized test clips\n";
}

// ---- extract ---------------------------------------------------------------

struct ExtractArgs {
  std::optional<fs::path> clips;
  std::vector<fs::path> wavs;
  fs::path out;
  std::string band = "audi";
  int jobs = 1;
  int sample_rate = 0;
};

void run_extract(const ExtractArgs& a) {
  const BandKind band = band_option(a.band);
  if (!a.clips && a.wavs.empty()) throw UsageError("extract needs --clips or at least one WAV file");
  std::vector<std::pair<std::string, fs::path>> jobs;  // (clip id, wav)
  if (a.clips) {
    require_file(*a.clips, "clip table");
    for (const auto& r : parse_clip_table(io::read_text_file(*a.clips))) {
      jobs.emplace_back(r.clip_id, a.clips->parent_path() / r.audio_path);
    }
  }
  for (const auto& w : a.wavs) jobs.emplace_back(w.stem().string(), w);
  for (const auto& [id, path] : jobs) require_file(path, "clip audio");
  fs::create_directories(a.out);

  WavLoadOptions load;
  if (a.sample_rate > 0) load.expected_sample_rate = a.sample_rate;
  else load.expected_sample_rate.reset();
  const FeatureConfig config{band};
  parallel_for(jobs.size(), a.jobs, [&](std::size_t i) {
    const auto& [id, path] = jobs[i];
    const AudioBuffer audio = load_wav(path, load);
    const FeatureMatrix fm = extract_features(audio.samples(), audio.sample_rate_hz(), config, id);
    write_features(fm, a.out / feature_filename(id, band));
  });
  std::cout << "extracted " << jobs.size() << " " << to_string(band) << " feature files\n";
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  fs::path clips;
  fs::path features;
  fs::path out;
  std::optional<fs::path> config;
  std::optional<fs::path> key;
  std::optional<fs::path> manifest;
  std::optional<std::string> band;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> lr;
  std::vector<std::uint64_t> seeds;
};

FeatureMatrix load_clip_features(const fs::path& dir, const std::string& clip_id, BandKind band) {
  FeatureMatrix fm = read_features(dir / feature_filename(clip_id, band));
  if (fm.band != band) throw DataError("feature file for '" + clip_id + "' has the wrong band");
  return fm;
}

void run_train(const TrainArgs& a) {
  require_file(a.clips, "clip table");
  require_dir(a.features, "feature directory");
  if (a.key.has_value() != a.manifest.has_value()) throw UsageError("--key and --manifest go together");
  if (a.key) require_file(*a.key, "shuffle key");
  if (a.manifest) require_file(*a.manifest, "manifest");

  TrainConfig config;
  if (a.config) config = train_config_from_json(load_json_file(*a.config));
  if (a.band) config.band = band_option(*a.band);
  if (a.epochs) config.epochs = *a.epochs;
  if (a.batch_size) config.batch_size = *a.batch_size;
  if (a.lr) config.adam.lr = *a.lr;
  if (!a.seeds.empty()) config.seeds = a.seeds;
  config.validate();

  LabeledSet train, valid, test;
  std::optional<ShuffleKey> key;
  std::map<std::string, Label, std::less<>> truth;
  if (a.key) {
    key = parse_shuffle_key(io::read_text_file(*a.key));
    truth = subject_truth(load_manifest(*a.manifest));
  }
  for (const auto& r : parse_clip_table(io::read_text_file(a.clips))) {
    if (r.split == Split::test) {
      if (!key) continue;
      const auto* e = key->find(r.clip_id);
      if (e == nullptr) throw DataError("test clip '" + r.clip_id + "' missing from the shuffle key");
      const auto it = truth.find(e->subject_id);
      if (it == truth.end()) throw DataError("subject '" + e->subject_id + "' missing from the manifest");
      test.push_back(load_clip_features(a.features, r.clip_id, config.band), static_cast<std::uint8_t>(it->second),
                     e->subject_id);
      continue;
    }
    if (!r.label) throw DataError("labeled clip '" + r.clip_id + "' has no label");
    LabeledSet& dst = r.split == Split::train ? train : valid;
    if (r.split != Split::train && r.split != Split::valid) continue;
    dst.push_back(load_clip_features(a.features, r.clip_id, config.band), static_cast<std::uint8_t>(*r.label),
                  r.subject_id);
  }

  const ExperimentSummary summary =
      run_experiment(config, std::move(train), std::move(valid),
                     test.size() > 0 ? std::optional<LabeledSet>(std::move(test)) : std::nullopt);
  fs::create_directories(a.out);
  json j = summary_to_json(summary);
  j["config"] = train_config_to_json(config);
  io::write_text_file(a.out / "summary.json", j.dump(2) + "\n");
  for (const auto& run : summary.runs) {
    const std::string tag = "seed_" + std::to_string(run.selection.seed);
    nn::write_checkpoint(run.params, a.out / (tag + ".mdvc"));
    io::write_text_file(a.out / ("history_" + tag + ".csv"), history_csv(run));
  }
  std::cout << format_results_table(std::span(&summary, 1));
}

// ---- predict ---------------------------------------------------------------

struct PredictArgs {
  fs::path run;
  fs::path clips;
  fs::path features;
  fs::path out;
  std::string split = "test";
  std::optional<double> threshold;
  std::optional<fs::path> checkpoint;
  std::optional<fs::path> probabilities;
};

void run_predict(const PredictArgs& a) {
  require_file(a.run / "summary.json", "run summary");
  require_file(a.clips, "clip table");
  require_dir(a.features, "feature directory");
  const auto split = parse_split(a.split);
  if (!split) throw UsageError("unknown split '" + a.split + "'");

  const ExperimentSummary summary = summary_from_json(load_json_file(a.run / "summary.json"));
  const auto& best = summary.runs.at(summary.best_index).selection;
  const fs::path ckpt = a.checkpoint.value_or(a.run / ("seed_" + std::to_string(best.seed) + ".mdvc"));
  require_file(ckpt, "checkpoint");
  const double threshold = a.threshold.value_or(best.threshold);
  if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold must lie in (0, 1)");
  const nn::ModelParams params = nn::read_checkpoint(ckpt);

  std::vector<FeatureMatrix> feats;
  for (const auto& r : parse_clip_table(io::read_text_file(a.clips))) {
    if (r.split == *split) feats.push_back(load_clip_features(a.features, r.clip_id, summary.band));
  }
  if (feats.empty()) throw DataError("no clips in split '" + a.split + "'");
  log_normalize(feats, summary.normalization);
  const auto probs = predict_probabilities(params, feats);

  Submission sub;
  std::ostringstream prob_csv;
  prob_csv.precision(17);
  prob_csv << "clip_id,probability\n";
  for (std::size_t i = 0; i < feats.size(); ++i) {
    sub.entries.emplace_back(feats[i].clip_id, probs[i] >= threshold ? 1 : 0);
    prob_csv << feats[i].clip_id << ',' << probs[i] << '\n';
  }
  io::write_text_file(a.out, serialize_submission(sub));
  if (a.probabilities) io::write_text_file(*a.probabilities, prob_csv.str());
  std::cout << "wrote " << sub.entries.size() << " predictions (threshold " << threshold << ")\n";
}

// ---- score / rank / ttest --------------------------------------------------

struct ScoreArgs {
  fs::path submission;
  fs::path key;
  fs::path manifest;
  std::optional<fs::path> out;
};

void run_score(const ScoreArgs& a) {
  require_file(a.submission, "submission");
  require_file(a.key, "shuffle key");
  require_file(a.manifest, "manifest");
  const ScoreReport report = score_submission(parse_submission(io::read_text_file(a.submission)),
                                              parse_shuffle_key(io::read_text_file(a.key)),
                                              subject_truth(load_manifest(a.manifest)));
  json votes = json::array();
  for (const auto& s : report.subjects) {
    votes.push_back({{"subject_id", s.subject_id}, {"label", s.label}, {"asd_votes", s.n_asd}, {"wild_type_votes", s.n_wild}});
  }
  const json j = {{"segment_uar", report.segment_uar}, {"subject_uar", report.subject_uar}, {"per_subject", votes}};
  if (a.out) io::write_text_file(*a.out, j.dump(2) + "\n");
  std::printf("segment_uar %.6f\nsubject_uar %.6f\n", report.segment_uar, report.subject_uar);
}

double parse_unit(std::string_view token, const std::string& line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(token), &used);
    if (used == token.size() && v >= 0.0 && v <= 1.0) return v;
  } catch (const std::exception&) {
  }
  throw DataError("malformed team row: " + line);
}

void run_rank(const fs::path& input, const std::optional<fs::path>& out) {
  require_file(input, "team scores");
  std::istringstream in(io::read_text_file(input));
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "team_id,segment_uar,subject_uar") throw DataError("team scores header mismatch");
  std::vector<TeamScore> teams;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(','), c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || c1 == 0) throw DataError("malformed team row: " + line);
    teams.push_back({line.substr(0, c1), parse_unit(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), line),
                     parse_unit(std::string_view(line).substr(c2 + 1), line)});
  }
  std::ostringstream csv;
  csv << "final_rank,team_id,segment_uar,subject_uar,segment_rank,subject_rank,average_rank\n";
  for (const auto& e : rank_teams(teams)) {
    csv << e.final_rank << ',' << e.team_id << ',' << e.segment_uar << ',' << e.subject_uar << ',' << e.segment_rank
        << ',' << e.subject_rank << ',' << e.average_rank << '\n';
  }
  if (out) io::write_text_file(*out, csv.str());
  std::cout << csv.str();
}

struct TTestArgs {
  std::vector<double> values;
  std::vector<double> a, b;
  std::vector<double> stats;  // mean, std, n
  std::vector<fs::path> summaries;
  std::string metric = "test_segment";
  double mu0 = 0.5;
};

std::vector<double> metric_values(const ExperimentSummary& s, const std::string& metric) {
  std::vector<double> out;
  for (const auto& r : s.runs) {
    if (metric == "valid_segment") out.push_back(r.selection.valid_segment_uar);
    else if (metric == "valid_subject") out.push_back(r.selection.valid_subject_uar);
    else if (metric == "test_segment" || metric == "test_subject") {
      if (!r.test) throw DataError("summary has no test scores");
      out.push_back(metric == "test_segment" ? r.test->segment_uar : r.test->subject_uar);
    } else {
      throw UsageError("unknown metric '" + metric + "'");
    }
  }
  return out;
}

void run_ttest(const TTestArgs& a) {
  const int modes = !a.values.empty() + !a.a.empty() + !a.stats.empty() + !a.summaries.empty();
  if (modes != 1) throw UsageError("ttest needs exactly one of --values, --a/--b, --stats, --summary");
  TTestResult r;
  if (!a.values.empty()) {
    r = t_test_one_sample_one_tailed(a.values, a.mu0);
  } else if (!a.a.empty()) {
    r = t_test_paired_one_tailed(a.a, a.b);
  } else if (!a.stats.empty()) {
    if (a.stats.size() != 3 || a.stats[2] < 2 || a.stats[2] != std::floor(a.stats[2])) {
      throw UsageError("--stats needs mean,std,n with integer n >= 2");
    }
    r = t_test_from_summary(a.stats[0], a.stats[1], static_cast<std::size_t>(a.stats[2]), a.mu0);
  } else {
    std::vector<std::vector<double>> sets;
    for (const auto& p : a.summaries) {
      require_file(p, "summary");
      sets.push_back(metric_values(summary_from_json(load_json_file(p)), a.metric));
    }
    if (sets.size() == 1) r = t_test_one_sample_one_tailed(sets[0], a.mu0);
    else if (sets.size() == 2) r = t_test_paired_one_tailed(sets[0], sets[1]);
    else throw UsageError("--summary takes one (vs chance) or two (paired) files");
  }
  std::printf("t %.6f\ndf %.0f\np %.6g\n", r.t, r.df, r.p);
}

// ---- report ----------------------------------------------------------------

void run_report(const std::vector<fs::path>& summaries, const fs::path& out) {
  std::vector<ExperimentSummary> all;
  for (const auto& p : summaries) {
    require_file(p, "summary");
    all.push_back(summary_from_json(load_json_file(p)));
  }
  fs::create_directories(out);
  const std::string table = format_results_table(all);
  io::write_text_file(out / "table.txt", table);
  for (const auto& s : all) {
    const std::string band(to_string(s.band));
    io::write_text_file(out / (band + "_per_seed.csv"), per_seed_csv(s));
    write_per_seed_png(s, out / (band + "_per_seed.png"));
  }
  std::cout << table;
}

int run(int argc, char** argv) {
  CLI::App app{"maduv: mouse vocalization classification pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset (WAVs + manifest.csv)");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--config", synth.config, "JSON synth config")->check(CLI::ExistingFile);
  c_synth->add_flag("--fast", synth.fast, "30 kHz, 30 s preset");
  c_synth->add_flag("--identical", synth.identical, "Give both classes the wild-type profile");
  c_synth->add_option("--subjects", synth.n_subjects, "Number of subjects");
  c_synth->add_option("--duration", synth.duration_s, "Seconds per subject");
  c_synth->add_option("--sample-rate", synth.sample_rate, "Sample rate in Hz");
  c_synth->add_option("--seed", synth.seed, "Master seed (default: MADUV_SEED or 0)");
  c_synth->add_option("--jobs", synth.jobs, "Worker threads")->check(CLI::PositiveNumber);

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Stratified train/valid/test partition of a manifest");
  c_split->add_option("--manifest", split.manifest, "Input manifest")->required();
  c_split->add_option("--out", split.out, "Output manifest")->required();
  c_split->add_option("--ratios", split.ratios, "train,valid,test")->delimiter(',');
  c_split->add_option("--seed", split.seed, "Seed (default: MADUV_SEED or 0)");

  SegmentArgs seg;
  auto* c_seg = app.add_subcommand("segment", "Cut clips: overlapped for train/valid, anonymized 30 s for test");
  c_seg->add_option("--manifest", seg.manifest, "Split manifest")->required();
  c_seg->add_option("--out", seg.out, "Output directory")->required();
  c_seg->add_option("--seed", seg.seed, "Shuffle seed (default: MADUV_SEED or 0)");
  c_seg->add_option("--sample-rate", seg.sample_rate, "Required input rate; 0 accepts any")
      ->capture_default_str();

  ExtractArgs ex;
  auto* c_ex = app.add_subcommand("extract", "Compute [59 x 500] log-spectrogram features");
  c_ex->add_option("--clips", ex.clips, "Clip table from segment");
  c_ex->add_option("wavs", ex.wavs, "Individual WAV files (clip id = file stem)");
  c_ex->add_option("--out", ex.out, "Feature directory")->required();
  c_ex->add_option("--band", ex.band, "full | audi | ultra")->capture_default_str();
  c_ex->add_option("--jobs", ex.jobs, "Worker threads")->check(CLI::PositiveNumber);
  c_ex->add_option("--sample-rate", ex.sample_rate, "Required input rate; 0 accepts any")->capture_default_str();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train one model per seed and select checkpoints on validation");
  c_tr->add_option("--clips", tr.clips, "Clip table")->required();
  c_tr->add_option("--features", tr.features, "Feature directory")->required();
  c_tr->add_option("--out", tr.out, "Run directory")->required();
  c_tr->add_option("--config", tr.config, "JSON train config")->check(CLI::ExistingFile);
  c_tr->add_option("--key", tr.key, "Shuffle key, to also score the test split");
  c_tr->add_option("--manifest", tr.manifest, "Manifest with subject labels (with --key)");
  c_tr->add_option("--band", tr.band, "Override: full | audi | ultra");
  c_tr->add_option("--epochs", tr.epochs, "Override: epochs");
  c_tr->add_option("--batch-size", tr.batch_size, "Override: minibatch size");
  c_tr->add_option("--lr", tr.lr, "Override: Adam learning rate");
  c_tr->add_option("--seeds", tr.seeds, "Override: seeds")->delimiter(',');

  PredictArgs pr;
  auto* c_pr = app.add_subcommand("predict", "Write a submission CSV from a trained run");
  c_pr->add_option("--run", pr.run, "Run directory from train")->required();
  c_pr->add_option("--clips", pr.clips, "Clip table")->required();
  c_pr->add_option("--features", pr.features, "Feature directory")->required();
  c_pr->add_option("--out", pr.out, "Submission CSV")->required();
  c_pr->add_option("--split", pr.split, "Which clips to predict")->capture_default_str();
  c_pr->add_option("--threshold", pr.threshold, "Override the selected threshold");
  c_pr->add_option("--checkpoint", pr.checkpoint, "Override the best-seed checkpoint");
  c_pr->add_option("--probabilities", pr.probabilities, "Also write clip probabilities");

  ScoreArgs sc;
  auto* c_sc = app.add_subcommand("score", "Score a submission against the shuffle key");
  c_sc->add_option("--submission", sc.submission, "Submission CSV")->required();
  c_sc->add_option("--key", sc.key, "Shuffle key CSV")->required();
  c_sc->add_option("--manifest", sc.manifest, "Manifest with subject labels")->required();
  c_sc->add_option("--out", sc.out, "Report JSON");

  fs::path rank_in;
  std::optional<fs::path> rank_out;
  auto* c_rank = app.add_subcommand("rank", "Leaderboard from team_id,segment_uar,subject_uar rows");
  c_rank->add_option("--input", rank_in, "Team scores CSV")->required();
  c_rank->add_option("--out", rank_out, "Ranking CSV");

  TTestArgs tt;
  auto* c_tt = app.add_subcommand("ttest", "One-tailed t-tests against chance or between feature sets");
  c_tt->add_option("--values", tt.values, "Per-seed UARs vs mu0")->delimiter(',');
  auto* opt_a = c_tt->add_option("--a", tt.a, "Paired sample a")->delimiter(',');
  auto* opt_b = c_tt->add_option("--b", tt.b, "Paired sample b")->delimiter(',');
  opt_a->needs(opt_b);
  opt_b->needs(opt_a);
  c_tt->add_option("--stats", tt.stats, "mean,std,n")->delimiter(',');
  c_tt->add_option("--summary", tt.summaries, "One or two summary.json files");
  c_tt->add_option("--metric", tt.metric, "valid_segment | valid_subject | test_segment | test_subject")
      ->capture_default_str();
  c_tt->add_option("--mu0", tt.mu0, "Null mean")->capture_default_str();

  std::vector<fs::path> rep_in;
  fs::path rep_out;
  auto* c_rep = app.add_subcommand("report", "Results table plus per-seed CSV and PNG");
  c_rep->add_option("--summary", rep_in, "summary.json files")->required();
  c_rep->add_option("--out", rep_out, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "MADUV-ERR: usage: " << e.what() << '\n';
    return 1;
  }

  if (c_synth->parsed()) run_synth(synth);
  else if (c_split->parsed()) run_split(split);
  else if (c_seg->parsed()) run_segment(seg);
  else if (c_ex->parsed()) run_extract(ex);
  else if (c_tr->parsed()) run_train(tr);
  else if (c_pr->parsed()) run_predict(pr);
  else if (c_sc->parsed()) run_score(sc);
  else if (c_rank->parsed()) run_rank(rank_in, rank_out);
  else if (c_tt->parsed()) run_ttest(tt);
  else if (c_rep->parsed()) run_report(rep_in, rep_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const maduv::Error& e) {
    std::cerr << "MADUV-ERR: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "MADUV-ERR: " << e.what() << '\n';
    return 2;
  } catch (const std::bad_alloc&) {
    std::cerr << "MADUV-ERR: out of memory\n";
    return 2;
  }
}
