#include "maduv/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "maduv/error.hpp"
#include "maduv/png.hpp"

namespace maduv {

using nlohmann::json;

namespace {

json mean_std_json(const MeanStd& ms) { return {{"mean", ms.mean}, {"std", ms.std}}; }
MeanStd mean_std_from(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

}  // namespace

json summary_to_json(const ExperimentSummary& s) {
  json runs = json::array();
  for (const auto& r : s.runs) {
    json row = {{"seed", r.selection.seed},
                {"epoch", r.selection.epoch},
                {"threshold", r.selection.threshold},
                {"valid_segment_uar", r.selection.valid_segment_uar},
                {"valid_subject_uar", r.selection.valid_subject_uar}};
    if (r.test) {
      row["test_segment_uar"] = r.test->segment_uar;
      row["test_subject_uar"] = r.test->subject_uar;
    }
    runs.push_back(std::move(row));
  }
  json j = {{"band", std::string(to_string(s.band))},
            {"normalization", {{"mean", s.normalization.mean}, {"std", s.normalization.std}}},
            {"runs", std::move(runs)},
            {"best_index", s.best_index},
            {"aggregate",
             {{"valid_segment", mean_std_json(s.valid_segment)}, {"valid_subject", mean_std_json(s.valid_subject)}}}};
  if (s.test_segment) j["aggregate"]["test_segment"] = mean_std_json(*s.test_segment);
  if (s.test_subject) j["aggregate"]["test_subject"] = mean_std_json(*s.test_subject);
  return j;
}

ExperimentSummary summary_from_json(const json& j) {
  try {
    ExperimentSummary s;
    const auto band = parse_band_kind(j.at("band").get<std::string>());
    if (!band) throw DataError("unknown band in summary");
    s.band = *band;
    s.normalization = {j.at("normalization").at("mean").get<double>(), j.at("normalization").at("std").get<double>()};
    for (const auto& row : j.at("runs")) {
      SeedRun r;
      r.selection.seed = row.at("seed").get<std::uint64_t>();
      r.selection.epoch = row.at("epoch").get<int>();
      r.selection.threshold = row.at("threshold").get<double>();
      r.selection.valid_segment_uar = row.at("valid_segment_uar").get<double>();
      r.selection.valid_subject_uar = row.at("valid_subject_uar").get<double>();
      if (row.contains("test_segment_uar")) {
        r.test = SetScores{row.at("test_segment_uar").get<double>(), row.at("test_subject_uar").get<double>()};
      }
      s.runs.push_back(std::move(r));
    }
    s.best_index = j.at("best_index").get<std::size_t>();
    const auto& agg = j.at("aggregate");
    s.valid_segment = mean_std_from(agg.at("valid_segment"));
    s.valid_subject = mean_std_from(agg.at("valid_subject"));
    if (agg.contains("test_segment")) s.test_segment = mean_std_from(agg.at("test_segment"));
    if (agg.contains("test_subject")) s.test_subject = mean_std_from(agg.at("test_subject"));
    if (s.runs.empty() || s.best_index >= s.runs.size()) throw DataError("summary has no valid best run");
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed experiment summary: ") + e.what());
  }
}

namespace {

std::string three_places(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s = buf;
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  else if (s.rfind("-0.", 0) == 0) s.erase(1, 1);
  return s;
}

}  // namespace

std::string format_cell(double best, double mean, double std) {
  return three_places(best) + " (" + three_places(mean) + " ± " + three_places(std) + ")";
}

namespace {

// Pads to a visible width, counting UTF-8 code points rather than bytes.
std::string pad(const std::string& s, std::size_t width) {
  std::size_t visible = 0;
  for (unsigned char c : s) visible += (c & 0xC0) != 0x80;
  return visible >= width ? s : s + std::string(width - visible, ' ');
}

constexpr std::size_t kFeatureWidth = 11;
constexpr std::size_t kCellWidth = 20;

}  // namespace

std::string format_results_table(std::span<const ExperimentSummary> summaries) {
  std::ostringstream out;
  out << pad("feature", kFeatureWidth);
  for (const char* h : {"valid segment", "valid subject", "test segment", "test subject"}) {
    out << " | " << pad(h, kCellWidth);
  }
  out << '\n' << std::string(kFeatureWidth, '-');
  for (int i = 0; i < 4; ++i) out << "-+-" << std::string(kCellWidth, '-');
  out << '\n';
  for (const auto& s : summaries) {
    const auto& best = s.runs.at(s.best_index);
    std::vector<std::string> cells = {
        format_cell(best.selection.valid_segment_uar, s.valid_segment.mean, s.valid_segment.std),
        format_cell(best.selection.valid_subject_uar, s.valid_subject.mean, s.valid_subject.std), "-", "-"};
    if (best.test && s.test_segment && s.test_subject) {
      cells[2] = format_cell(best.test->segment_uar, s.test_segment->mean, s.test_segment->std);
      cells[3] = format_cell(best.test->subject_uar, s.test_subject->mean, s.test_subject->std);
    }
    out << pad(std::string(to_string(s.band)), kFeatureWidth);
    for (const auto& c : cells) out << " | " << pad(c, kCellWidth);
    out << '\n';
  }
  return out.str();
}

std::string per_seed_csv(const ExperimentSummary& s) {
  std::ostringstream out;
  out << "seed,epoch,threshold,valid_segment_uar,valid_subject_uar,test_segment_uar,test_subject_uar,best\n";
  out.precision(17);
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    const auto& r = s.runs[i];
    out << r.selection.seed << ',' << r.selection.epoch << ',' << r.selection.threshold << ','
        << r.selection.valid_segment_uar << ',' << r.selection.valid_subject_uar << ',';
    if (r.test) out << r.test->segment_uar << ',' << r.test->subject_uar;
    else out << ',';
    out << ',' << (i == s.best_index ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string history_csv(const SeedRun& run) {
  std::ostringstream out;
  out << "epoch,loss,valid_uar,threshold\n";
  out.precision(17);
  for (const auto& e : run.history) out << e.epoch << ',' << e.loss << ',' << e.valid_uar << ',' << e.threshold << '\n';
  return out.str();
}

void write_per_seed_png(const ExperimentSummary& s, const std::filesystem::path& path) {
  constexpr int kBar = 14, kGap = 4, kGroupGap = 24, kMargin = 30, kPlotHeight = 240;
  const int groups = static_cast<int>(s.runs.size());
  const int width = 2 * kMargin + groups * (4 * kBar + 3 * kGap) + (groups - 1) * kGroupGap;
  const int height = kPlotHeight + 2 * kMargin;
  Image img(width, height);
  const Rgb colors[4] = {{31, 119, 180}, {174, 199, 232}, {214, 39, 40}, {255, 152, 150}};
  const int base = kMargin + kPlotHeight;
  const auto y_of = [&](double v) { return base - static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * kPlotHeight)); };

  for (int g = 0; g < groups; ++g) {
    const auto& r = s.runs[static_cast<std::size_t>(g)];
    const double values[4] = {r.selection.valid_segment_uar, r.selection.valid_subject_uar,
                              r.test ? r.test->segment_uar : 0.0, r.test ? r.test->subject_uar : 0.0};
    const int x0 = kMargin + g * (4 * kBar + 3 * kGap + kGroupGap);
    if (static_cast<std::size_t>(g) == s.best_index) {
      img.fill_rect(x0 - 3, base + 4, x0 + 4 * kBar + 3 * kGap + 3, base + 8, {0, 0, 0});
    }
    for (int b = 0; b < 4; ++b) {
      const int x = x0 + b * (kBar + kGap);
      img.fill_rect(x, y_of(values[b]), x + kBar, base, colors[b]);
    }
  }
  img.fill_rect(kMargin - 2, kMargin, kMargin, base + 1, {0, 0, 0});  // y axis
  img.fill_rect(kMargin - 2, base, width - kMargin, base + 2, {0, 0, 0});  // x axis
  for (int x = kMargin; x < width - kMargin; x += 8) img.fill_rect(x, y_of(0.5), x + 4, y_of(0.5) + 1, {90, 90, 90});
  img.write_png(path);
}

}  // namespace maduv
