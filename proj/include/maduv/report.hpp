#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"
#include "maduv/train.hpp"

namespace maduv {

/// Everything in the summary except model weights.
nlohmann::json summary_to_json(const ExperimentSummary& summary);
ExperimentSummary summary_from_json(const nlohmann::json& j);

/// ".675 (.666 ± .007)": best-on-validation value, then mean ± std.
std::string format_cell(double best, double mean, double std);

/// One row per summary: feature | valid segment | valid subject | test segment | test subject.
std::string format_results_table(std::span<const ExperimentSummary> summaries);

/// "seed,epoch,threshold,valid_segment_uar,valid_subject_uar,test_segment_uar,test_subject_uar,best"
std::string per_seed_csv(const ExperimentSummary& summary);

/// "epoch,loss,valid_uar,threshold"
std::string history_csv(const SeedRun& run);

/// Grouped bar chart, one group per seed in run order: valid segment, valid
/// subject (blues), test segment, test subject (reds). A dashed line marks
/// chance (0.5); a bar under a group marks the best-on-validation seed.
void write_per_seed_png(const ExperimentSummary& summary, const std::filesystem::path& path);

}  // namespace maduv
