#include "maduv/segment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "maduv/error.hpp"
#include "maduv/rng.hpp"

namespace maduv {

std::string make_clip_id(std::string_view subject_id, std::size_t index) {
  char suffix[32];
  std::snprintf(suffix, sizeof(suffix), "__%03zu", index);
  return std::string(subject_id) + suffix;
}

namespace {

std::size_t to_samples(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

std::vector<Clip> cut(const std::shared_ptr<const AudioBuffer>& audio, std::string_view subject_id,
                      std::optional<Label> label, double window_s, double hop_s) {
  if (!(window_s > 0.0)) throw UsageError("window must be positive");
  if (!(hop_s > 0.0) || hop_s > window_s) throw UsageError("hop must satisfy 0 < hop <= window");
  std::vector<Clip> clips;
  if (!audio) return clips;
  const int rate = audio->sample_rate_hz();
  const std::size_t window = to_samples(window_s, rate);
  const std::size_t hop = to_samples(hop_s, rate);
  if (window == 0 || hop == 0) throw UsageError("window/hop shorter than one sample");
  if (audio->size() < window) return clips;
  const std::size_t count = (audio->size() - window) / hop + 1;
  clips.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Clip c;
    c.subject_id = std::string(subject_id);
    c.clip_id = make_clip_id(subject_id, i);
    c.offset = i * hop;
    c.length = window;
    c.start_s = static_cast<double>(c.offset) / rate;
    c.duration_s = static_cast<double>(window) / rate;
    c.source = audio;
    c.inherited_label = label;
    clips.push_back(std::move(c));
  }
  return clips;
}

}  // namespace

std::vector<Clip> segment_overlapped(std::shared_ptr<const AudioBuffer> audio, std::string_view subject_id,
                                     std::optional<Label> label, double window_s, double hop_s) {
  return cut(audio, subject_id, label, window_s, hop_s);
}

std::vector<Clip> segment_nonoverlapped(std::shared_ptr<const AudioBuffer> audio,
                                        std::string_view subject_id, std::optional<Label> label,
                                        double window_s) {
  return cut(audio, subject_id, label, window_s, window_s);
}

const ShuffleKeyEntry* ShuffleKey::find(std::string_view anonymized_id) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), anonymized_id,
                                   [](const ShuffleKeyEntry& e, std::string_view id) {
                                     return e.anonymized_id < id;
                                   });
  return it != entries.end() && it->anonymized_id == anonymized_id ? &*it : nullptr;
}

ShuffledClips shuffle_clips(std::span<const Clip> clips, std::uint64_t seed) {
  std::set<std::string_view> ids;
  for (const auto& c : clips) {
    if (!ids.insert(c.clip_id).second) throw DataError("duplicate clip_id '" + c.clip_id + "'");
  }

  std::vector<std::size_t> order(clips.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));

  const int width = std::max<int>(4, static_cast<int>(std::to_string(clips.size()).size()));
  ShuffledClips out;
  out.key.seed = seed;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const Clip& src = clips[order[pos]];
    std::string digits = std::to_string(pos);
    Clip anon = src;
    anon.clip_id = std::string(static_cast<std::size_t>(width) - std::min(digits.size(), static_cast<std::size_t>(width)), '0') + digits;
    anon.subject_id.clear();
    anon.inherited_label.reset();
    out.key.entries.push_back({anon.clip_id, src.clip_id, src.subject_id});
    out.clips.push_back(std::move(anon));
  }
  return out;
}

std::string serialize_shuffle_key(const ShuffleKey& key) {
  std::ostringstream out;
  out << "anonymized_id,clip_id,subject_id\n";
  for (const auto& e : key.entries) out << e.anonymized_id << ',' << e.clip_id << ',' << e.subject_id << '\n';
  return out.str();
}

ShuffleKey parse_shuffle_key(std::string_view text) {
  ShuffleKey key;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw DataError("shuffle key is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "anonymized_id,clip_id,subject_id") throw DataError("shuffle key header mismatch");
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = a == std::string::npos ? a : line.find(',', a + 1);
    if (b == std::string::npos || line.find(',', b + 1) != std::string::npos) {
      throw DataError("malformed shuffle key row: " + line);
    }
    ShuffleKeyEntry e{line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)};
    if (!seen.insert(e.anonymized_id).second) throw DataError("duplicate anonymized id " + e.anonymized_id);
    key.entries.push_back(std::move(e));
  }
  std::sort(key.entries.begin(), key.entries.end(),
            [](const auto& x, const auto& y) { return x.anonymized_id < y.anonymized_id; });
  return key;
}

std::string serialize_clip_table(std::span<const ClipRecord> rows) {
  std::ostringstream out;
  out.precision(17);
  out << kClipTableHeader << '\n';
  for (const auto& r : rows) {
    out << r.clip_id << ',' << r.subject_id << ',' << to_string(r.split) << ',';
    if (r.label) out << to_string(*r.label);
    out << ',' << r.start_s << ',' << r.duration_s << ',' << r.audio_path << '\n';
  }
  return out.str();
}

namespace {

double parse_seconds(std::string_view token, const std::string& line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v) || v < 0.0) {
    throw DataError("malformed clip table row: " + line);
  }
  return v;
}

}  // namespace

std::vector<ClipRecord> parse_clip_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw DataError("clip table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kClipTableHeader) throw DataError("clip table header mismatch");
  std::vector<ClipRecord> rows;
  std::set<std::string, std::less<>> seen;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    for (auto pos = rest.find(','); pos != std::string_view::npos; pos = rest.find(',')) {
      f.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    f.push_back(rest);
    if (f.size() != 7 || f[0].empty() || f[6].empty()) throw DataError("malformed clip table row: " + line);
    ClipRecord r;
    r.clip_id = f[0];
    r.subject_id = f[1];
    const auto split = parse_split(f[2]);
    if (!split) throw DataError("unknown split in clip table row: " + line);
    r.split = *split;
    if (!f[3].empty()) {
      const auto label = parse_label(f[3]);
      if (!label) throw DataError("unknown label in clip table row: " + line);
      r.label = *label;
    }
    r.start_s = parse_seconds(f[4], line);
    r.duration_s = parse_seconds(f[5], line);
    r.audio_path = f[6];
    if (!seen.insert(r.clip_id).second) throw DataError("duplicate clip_id " + r.clip_id);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace maduv
