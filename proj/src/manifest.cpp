#include "maduv/manifest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "maduv/binary_io.hpp"
#include "maduv/error.hpp"
#include "maduv/rng.hpp"

namespace maduv {

std::string_view to_string(Sex sex) { return sex == Sex::male ? "male" : "female"; }

std::string_view to_string(Label label) { return label == Label::asd ? "asd" : "wild_type"; }

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
    case Split::unassigned: return "unassigned";
  }
  return "unassigned";
}

std::optional<Sex> parse_sex(std::string_view token) {
  if (token == "male") return Sex::male;
  if (token == "female") return Sex::female;
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view token) {
  if (token == "wild_type") return Label::wild_type;
  if (token == "asd") return Label::asd;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view token) {
  if (token == "train") return Split::train;
  if (token == "valid") return Split::valid;
  if (token == "test") return Split::test;
  if (token == "unassigned" || token.empty()) return Split::unassigned;
  return std::nullopt;
}

const SubjectRecord* Manifest::find(std::string_view subject_id) const {
  for (const auto& r : records) {
    if (r.subject_id == subject_id) return &r;
  }
  return nullptr;
}

std::size_t Manifest::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const auto& r) { return r.split == split; }));
}

std::size_t Manifest::count(Split split, Label label) const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const auto& r) {
    return r.split == split && r.label == label;
  }));
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

Manifest parse_manifest(std::string_view text) {
  Manifest manifest;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim_cr(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!header_seen) {
      if (line != kManifestHeader) throw DataError("manifest header mismatch: expected '" +
                                                   std::string(kManifestHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    const auto where = "manifest line " + std::to_string(line_no) + ": ";
    const auto fields = split_fields(line);
    if (fields.size() != 6) throw DataError(where + "malformed row (expected 6 fields)");

    SubjectRecord r;
    r.subject_id = std::string(fields[0]);
    if (r.subject_id.empty()) throw DataError(where + "malformed row (empty subject_id)");
    const auto sex = parse_sex(fields[1]);
    if (!sex) throw DataError(where + "unknown sex token '" + std::string(fields[1]) + "'");
    const auto label = parse_label(fields[2]);
    if (!label) throw DataError(where + "unknown label token '" + std::string(fields[2]) + "'");
    const auto day = fields[3];
    const auto [ptr, ec] = std::from_chars(day.data(), day.data() + day.size(), r.postnatal_day);
    if (ec != std::errc{} || ptr != day.data() + day.size()) {
      throw DataError(where + "malformed row (postnatal_day '" + std::string(day) + "')");
    }
    r.audio_path = std::string(fields[4]);
    const auto split = parse_split(fields[5]);
    if (!split) throw DataError(where + "unknown split token '" + std::string(fields[5]) + "'");
    r.sex = *sex;
    r.label = *label;
    r.split = *split;
    if (!seen.insert(r.subject_id).second) {
      throw DataError(where + "duplicate subject_id '" + r.subject_id + "'");
    }
    manifest.records.push_back(std::move(r));
  }
  if (!header_seen) throw DataError("manifest is empty (missing header)");
  return manifest;
}

std::string serialize_manifest(const Manifest& manifest) {
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& r : manifest.records) {
    if (r.subject_id.find_first_of(",\n") != std::string::npos ||
        r.audio_path.find_first_of(",\n") != std::string::npos) {
      throw DataError("field contains a comma or newline: " + r.subject_id);
    }
    out << r.subject_id << ',' << to_string(r.sex) << ',' << to_string(r.label) << ','
        << r.postnatal_day << ',' << r.audio_path << ',' << to_string(r.split) << '\n';
  }
  return out.str();
}

Manifest load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(io::read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  io::write_text_file(path, serialize_manifest(manifest));
}

void validate_audio_paths(const Manifest& manifest, const std::filesystem::path& base_dir) {
  for (const auto& r : manifest.records) {
    std::filesystem::path p(r.audio_path);
    if (p.is_relative()) p = base_dir / p;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) {
      throw DataError("audio for subject '" + r.subject_id + "' not found: " + p.string());
    }
  }
}

namespace {

double floor_eps(double x) { return std::floor(x + 1e-9); }
double ceil_eps(double x) { return std::ceil(x - 1e-9); }

// Feasible integer flow with per-edge [lo, hi] bounds, by the usual reduction
// to max-flow between a super source and sink (Edmonds-Karp; graphs here have
// a few dozen edges).
class BoundedFlow {
 public:
  explicit BoundedFlow(std::size_t nodes) : adj_(nodes + 2), excess_(nodes + 2, 0) {}

  std::size_t add_edge(std::size_t u, std::size_t v, long lo, long hi) {
    lo_.push_back(lo);
    excess_[v] += lo;
    excess_[u] -= lo;
    return push(u, v, hi - lo);
  }

  /// Solves for a flow from s to t meeting every bound; false when none exists.
  bool solve(std::size_t s, std::size_t t) {
    const std::size_t ss = adj_.size() - 2, tt = adj_.size() - 1;
    push(t, s, 1L << 40);
    long need = 0;
    for (std::size_t v = 0; v < ss; ++v) {
      if (excess_[v] > 0) {
        push(ss, v, excess_[v]);
        need += excess_[v];
      } else if (excess_[v] < 0) {
        push(v, tt, -excess_[v]);
      }
    }
    long flow = 0;
    while (true) {
      std::vector<std::size_t> via(adj_.size(), kNone);
      std::vector<std::size_t> queue{ss};
      via[ss] = kNone - 1;
      for (std::size_t q = 0; q < queue.size() && via[tt] == kNone; ++q) {
        for (std::size_t e : adj_[queue[q]]) {
          if (edges_[e].cap > 0 && via[edges_[e].to] == kNone) {
            via[edges_[e].to] = e;
            queue.push_back(edges_[e].to);
          }
        }
      }
      if (via[tt] == kNone) break;
      long add = 1L << 40;
      for (std::size_t v = tt; v != ss; v = edges_[via[v] ^ 1].to) add = std::min(add, edges_[via[v]].cap);
      for (std::size_t v = tt; v != ss; v = edges_[via[v] ^ 1].to) {
        edges_[via[v]].cap -= add;
        edges_[via[v] ^ 1].cap += add;
      }
      flow += add;
    }
    return flow == need;
  }

  /// Flow on the i-th edge added with add_edge().
  long value(std::size_t id) const { return lo_[id] + edges_[2 * id + 1].cap; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  struct Edge {
    std::size_t to;
    long cap;
  };
  std::size_t push(std::size_t u, std::size_t v, long cap) {
    adj_[u].push_back(edges_.size());
    edges_.push_back({v, cap});
    adj_[v].push_back(edges_.size());
    edges_.push_back({u, 0});
    return edges_.size() / 2 - 1;
  }
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Edge> edges_;
  std::vector<long> lo_;
  std::vector<long> excess_;
};

using Interval = std::pair<long, long>;
using Allocation = std::array<std::array<std::size_t, 3>, 4>;  // [stratum][split]

// Rounds the (stratum x split) table under three nested constraints: split
// totals, per-(label, split) totals, and cells within floor/ceil of
// ratio * stratum size.
std::optional<Allocation> round_table(const std::array<std::size_t, 4>& sizes, const std::array<double, 3>& w,
                                      const std::array<Interval, 3>& split_totals,
                                      const std::array<std::array<Interval, 3>, 2>& label_totals) {
  constexpr std::size_t kSource = 0, kSink = 1;
  const auto split_node = [](std::size_t k) { return 2 + k; };
  const auto label_node = [](std::size_t label, std::size_t k) { return 5 + 3 * label + k; };
  const auto stratum_node = [](std::size_t s) { return 11 + s; };
  BoundedFlow g(15);
  for (std::size_t k = 0; k < 3; ++k) {
    g.add_edge(kSource, split_node(k), split_totals[k].first, split_totals[k].second);
    for (std::size_t label = 0; label < 2; ++label) {
      g.add_edge(split_node(k), label_node(label, k), label_totals[label][k].first, label_totals[label][k].second);
    }
  }
  std::array<std::array<std::size_t, 3>, 4> cell{};
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t k = 0; k < 3; ++k) {
      const double t = w[k] * static_cast<double>(sizes[s]);
      cell[s][k] = g.add_edge(label_node(s / 2, k), stratum_node(s), static_cast<long>(floor_eps(t)),
                              static_cast<long>(ceil_eps(t)));
    }
    const auto n = static_cast<long>(sizes[s]);
    g.add_edge(stratum_node(s), kSink, n, n);
  }
  if (!g.solve(kSource, kSink)) return std::nullopt;
  Allocation out{};
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t k = 0; k < 3; ++k) out[s][k] = static_cast<std::size_t>(g.value(cell[s][k]));
  }
  return out;
}

std::size_t floor_count(double ratio, std::size_t pool) {
  return std::min(pool, static_cast<std::size_t>(floor_eps(ratio * static_cast<double>(pool))));
}

Interval around(double x) { return {static_cast<long>(floor_eps(x)), static_cast<long>(ceil_eps(x))}; }

}  // namespace

SplitResult stratified_split(const Manifest& manifest, const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.valid < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9) {
    throw UsageError("split ratios must be non-negative and sum to 1");
  }

  // Strata indexed as label * 2 + sex: (wild,male), (wild,female), (asd,male), (asd,female).
  std::array<std::vector<std::size_t>, 4> strata;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    strata[static_cast<std::size_t>(r.label) * 2 + static_cast<std::size_t>(r.sex)].push_back(i);
  }

  SplitResult result;
  result.manifest = manifest;
  const int active_splits = (ratios.train > 0) + (ratios.valid > 0) + (ratios.test > 0);
  std::array<std::size_t, 4> sizes{};
  for (std::size_t s = 0; s < strata.size(); ++s) {
    auto& members = strata[s];
    sizes[s] = members.size();
    if (!members.empty() && members.size() < static_cast<std::size_t>(active_splits)) {
      result.warnings.push_back("stratum (" + std::string(to_string(static_cast<Label>(s / 2))) + ", " +
                                std::string(to_string(static_cast<Sex>(s % 2))) + ") has " +
                                std::to_string(members.size()) + " subject(s) for " +
                                std::to_string(active_splits) + " splits");
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return manifest.records[a].subject_id < manifest.records[b].subject_id;
    });
    Rng rng(derive_seed(seed, s));
    rng.shuffle(std::span(members));
  }

  // Split order in the tables below: train, valid, test.
  const std::array<double, 3> w = {ratios.train, ratios.valid, ratios.test};
  const std::size_t n = manifest.records.size();
  const double n_label[2] = {static_cast<double>(sizes[0] + sizes[1]), static_cast<double>(sizes[2] + sizes[3])};

  // Preferred split sizes: test first, then valid, each floor(ratio * pool).
  const std::size_t n_test = floor_count(ratios.test, n);
  const double rest = ratios.train + ratios.valid;
  const std::size_t n_valid = rest > 0 ? floor_count(ratios.valid / rest, n - n_test) : 0;
  const std::array<std::size_t, 3> preferred = {n - n_test - n_valid, n_valid, n_test};

  std::array<Interval, 3> exact{}, rounded{};
  std::array<std::array<Interval, 3>, 2> by_preferred{}, by_ratio{};
  for (std::size_t k = 0; k < 3; ++k) {
    exact[k] = {static_cast<long>(preferred[k]), static_cast<long>(preferred[k])};
    rounded[k] = around(w[k] * static_cast<double>(n));
    for (std::size_t label = 0; label < 2; ++label) {
      by_preferred[label][k] = n > 0 ? around(static_cast<double>(preferred[k]) * n_label[label] / static_cast<double>(n))
                                     : Interval{0, 0};
      by_ratio[label][k] = around(w[k] * n_label[label]);
    }
  }
  // The last attempt rounds a table whose every constraint is a sum over one
  // of two laminar families of cells; that system is totally unimodular, so
  // an integral rounding always exists.
  std::optional<Allocation> alloc = round_table(sizes, w, exact, by_preferred);
  if (!alloc) alloc = round_table(sizes, w, exact, by_ratio);
  if (!alloc) {
    alloc = round_table(sizes, w, rounded, by_ratio);
    result.warnings.push_back("split sizes adjusted to keep every stratum within one of its ratio");
  }
  if (!alloc) throw NumericError("stratified split: no consistent rounding");

  constexpr Split kOrder[3] = {Split::train, Split::valid, Split::test};
  for (std::size_t s = 0; s < 4; ++s) {
    std::size_t next = 0;
    for (std::size_t k : {2, 1, 0}) {
      for (std::size_t c = 0; c < (*alloc)[s][k]; ++c) result.manifest.records[strata[s][next++]].split = kOrder[k];
    }
  }
  return result;
}

}  // namespace maduv
