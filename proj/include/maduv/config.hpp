#pragma once

// JSON run configuration. Every object is closed: an unknown key is a usage
// error, so a misspelled option cannot silently fall back to its default.

#include <filesystem>

#include "json.hpp"
#include "maduv/synth.hpp"
#include "maduv/train.hpp"

namespace maduv {

/// Keys: epochs, batch_size, learning_rate, beta1, beta2, epsilon, seeds,
/// band, threshold_grid{lo,hi,step}, architecture{conv1_channels,
/// conv2_channels, kernel, pool, hidden}. Absent keys keep base's values.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
nlohmann::json train_config_to_json(const TrainConfig& config);

/// Keys: n_subjects, asd_fraction, male_fraction, duration_s, sample_rate_hz,
/// seed, encoding, jobs, identical_profiles.
SynthSpec synth_spec_from_json(const nlohmann::json& j, SynthSpec base = {});

/// Parses a file; throws UsageError for unreadable or malformed JSON.
nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace maduv
