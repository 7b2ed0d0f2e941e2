#include "maduv/config.hpp"

#include <initializer_list>
#include <string_view>

#include "maduv/binary_io.hpp"
#include "maduv/error.hpp"

namespace maduv {

using nlohmann::json;

namespace {

void require_keys(const json& j, std::string_view what, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw UsageError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw UsageError("unknown key '" + key + "' in " + std::string(what));
  }
}

template <class T>
void read_into(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  require_keys(j, "train config",
               {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "seeds", "band",
                "threshold_grid", "architecture"});
  read_into(j, "epochs", c.epochs);
  read_into(j, "batch_size", c.batch_size);
  read_into(j, "learning_rate", c.adam.lr);
  read_into(j, "beta1", c.adam.beta1);
  read_into(j, "beta2", c.adam.beta2);
  read_into(j, "epsilon", c.adam.eps);
  read_into(j, "seeds", c.seeds);
  if (j.contains("band")) {
    std::string token;
    read_into(j, "band", token);
    const auto band = parse_band_kind(token);
    if (!band) throw UsageError("unknown band '" + token + "'");
    c.band = *band;
  }
  if (j.contains("threshold_grid")) {
    const auto& g = j.at("threshold_grid");
    require_keys(g, "threshold_grid", {"lo", "hi", "step"});
    read_into(g, "lo", c.threshold_grid.lo);
    read_into(g, "hi", c.threshold_grid.hi);
    read_into(g, "step", c.threshold_grid.step);
  }
  if (j.contains("architecture")) {
    const auto& a = j.at("architecture");
    require_keys(a, "architecture", {"conv1_channels", "conv2_channels", "kernel", "pool", "hidden"});
    read_into(a, "conv1_channels", c.architecture.conv1_channels);
    read_into(a, "conv2_channels", c.architecture.conv2_channels);
    read_into(a, "kernel", c.architecture.kernel);
    read_into(a, "pool", c.architecture.pool);
    read_into(a, "hidden", c.architecture.hidden);
  }
  c.validate();
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.adam.lr},
          {"beta1", c.adam.beta1},
          {"beta2", c.adam.beta2},
          {"epsilon", c.adam.eps},
          {"seeds", c.seeds},
          {"band", std::string(to_string(c.band))},
          {"threshold_grid", {{"lo", c.threshold_grid.lo}, {"hi", c.threshold_grid.hi}, {"step", c.threshold_grid.step}}},
          {"architecture",
           {{"conv1_channels", c.architecture.conv1_channels},
            {"conv2_channels", c.architecture.conv2_channels},
            {"kernel", c.architecture.kernel},
            {"pool", c.architecture.pool},
            {"hidden", c.architecture.hidden}}}};
}

SynthSpec synth_spec_from_json(const json& j, SynthSpec s) {
  require_keys(j, "synth config",
               {"n_subjects", "asd_fraction", "male_fraction", "duration_s", "sample_rate_hz", "seed", "encoding",
                "jobs", "identical_profiles"});
  read_into(j, "n_subjects", s.n_subjects);
  read_into(j, "asd_fraction", s.asd_fraction);
  read_into(j, "male_fraction", s.male_fraction);
  read_into(j, "duration_s", s.duration_s);
  read_into(j, "sample_rate_hz", s.sample_rate_hz);
  read_into(j, "seed", s.seed);
  read_into(j, "jobs", s.jobs);
  if (j.contains("encoding")) {
    std::string token;
    read_into(j, "encoding", token);
    if (token == "pcm16") s.encoding = WavEncoding::pcm16;
    else if (token == "pcm24") s.encoding = WavEncoding::pcm24;
    else if (token == "pcm32") s.encoding = WavEncoding::pcm32;
    else if (token == "float32") s.encoding = WavEncoding::float32;
    else throw UsageError("unknown encoding '" + token + "'");
  }
  bool identical = false;
  read_into(j, "identical_profiles", identical);
  if (identical) s.asd = s.wild_type;
  s.validate();
  return s;
}

json load_json_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const Error& e) {
    throw UsageError("cannot read config '" + path.string() + "': " + e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace maduv
