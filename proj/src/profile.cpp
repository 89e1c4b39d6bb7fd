#include "edgeroute/profile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "edgeroute/error.hpp"
#include "edgeroute/format.hpp"

namespace edgeroute {
namespace {

constexpr std::size_t kColumns = 7;
constexpr std::string_view kColumnNames[kColumns] = {
    "model_id", "device_id", "framework", "group", "map", "latency_ms", "energy_mwh"};

[[noreturn]] void malformed(std::size_t line, std::string_view column,
                            const std::string& what) {
  throw Error(ErrorKind::kMalformedRow, "line " + std::to_string(line) +
                                            ", column '" + std::string(column) +
                                            "': " + what);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(std::string_view text, std::size_t line, std::string_view column) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    malformed(line, column, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

// Row-level check carrying a line number; the table constructor repeats it
// without location info for programmatic construction.
void validate_row(const ProfileEntry& e, std::size_t line) {
  auto require_id = [&](const std::string& v, std::string_view col) {
    if (v.empty()) malformed(line, col, "empty identifier");
  };
  require_id(e.model_id, "model_id");
  require_id(e.device_id, "device_id");
  require_id(e.group, "group");
  if (!std::isfinite(e.map) || e.map < 0.0 || e.map > 100.0) {
    malformed(line, "map", "mAP must lie in [0, 100], got " + format_double(e.map));
  }
  if (!std::isfinite(e.latency_ms) || e.latency_ms <= 0.0) {
    malformed(line, "latency_ms", "must be > 0, got " + format_double(e.latency_ms));
  }
  if (!std::isfinite(e.energy_mwh) || e.energy_mwh <= 0.0) {
    malformed(line, "energy_mwh", "must be > 0, got " + format_double(e.energy_mwh));
  }
}

ProfileTable load_csv(std::istream& in, std::string source) {
  std::string raw;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::vector<ProfileEntry> entries;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") {
      line.remove_prefix(3);
    }
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kProfileCsvHeader) {
        malformed(line_no, "header",
                  "expected '" + std::string(kProfileCsvHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    auto fields = split_csv(line);
    if (fields.size() != kColumns) {
      malformed(line_no, fields.size() < kColumns ? kColumnNames[fields.size()] : "energy_mwh",
                "expected " + std::to_string(kColumns) + " fields, got " +
                    std::to_string(fields.size()));
    }
    ProfileEntry e;
    e.model_id = std::string(fields[0]);
    e.device_id = std::string(fields[1]);
    e.framework = std::string(fields[2]);
    e.group = std::string(fields[3]);
    e.map = parse_number(fields[4], line_no, kColumnNames[4]);
    e.latency_ms = parse_number(fields[5], line_no, kColumnNames[5]);
    e.energy_mwh = parse_number(fields[6], line_no, kColumnNames[6]);
    validate_row(e, line_no);
    entries.push_back(std::move(e));
  }
  return ProfileTable(std::move(entries), std::move(source));
}

ProfileTable load_json(std::istream& in, std::string source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorKind::kMalformedRow, std::string("invalid JSON: ") + ex.what());
  }
  const nlohmann::json* rows = &doc;
  if (doc.is_object()) {
    if (doc.contains("source") && doc["source"].is_string()) {
      source = doc["source"].get<std::string>();
    }
    if (!doc.contains("entries")) {
      throw Error(ErrorKind::kMalformedRow, "JSON profile object lacks 'entries'");
    }
    rows = &doc["entries"];
  }
  if (!rows->is_array()) {
    throw Error(ErrorKind::kMalformedRow, "JSON profile entries must be an array");
  }
  std::vector<ProfileEntry> entries;
  std::size_t index = 0;
  for (const auto& row : *rows) {
    ++index;
    ProfileEntry e;
    for (auto col : kColumnNames) {
      if (!row.contains(col)) malformed(index, col, "missing");
    }
    try {
      e.model_id = row.at("model_id").get<std::string>();
      e.device_id = row.at("device_id").get<std::string>();
      e.framework = row.at("framework").get<std::string>();
      e.group = row.at("group").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      malformed(index, "model_id", "identifier fields must be strings");
    }
    auto number = [&](std::string_view col) {
      const auto& v = row.at(std::string(col));
      if (!v.is_number()) malformed(index, col, "not a number");
      return v.get<double>();
    };
    e.map = number("map");
    e.latency_ms = number("latency_ms");
    e.energy_mwh = number("energy_mwh");
    validate_row(e, index);
    entries.push_back(std::move(e));
  }
  return ProfileTable(std::move(entries), std::move(source));
}

// Lexicographic "better-first" key for the skyline sweep.
bool better_first(const ProfileEntry& a, const ProfileEntry& b,
                  std::span<const Objective> objectives) {
  for (auto obj : objectives) {
    switch (obj) {
      case Objective::kMaxMap:
        if (a.map != b.map) return a.map > b.map;
        break;
      case Objective::kMinLatency:
        if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
        break;
      case Objective::kMinEnergy:
        if (a.energy_mwh != b.energy_mwh) return a.energy_mwh < b.energy_mwh;
        break;
    }
  }
  return false;
}

}  // namespace

std::string PairId::to_string() const { return model_id + "@" + device_id; }

PairId PairId::parse(std::string_view text) {
  auto at = text.find('@');
  if (at == std::string_view::npos || at == 0 || at + 1 == text.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "pair must look like model@device, got '" + std::string(text) + "'");
  }
  return {std::string(text.substr(0, at)), std::string(text.substr(at + 1))};
}

void validate_entry(const ProfileEntry& e) { validate_row(e, 0); }

ProfileTable::ProfileTable(std::vector<ProfileEntry> entries, std::string source)
    : entries_(std::move(entries)), source_(std::move(source)) {
  if (entries_.empty()) {
    throw Error(ErrorKind::kEmptyTable, "profile table '" + source_ + "' is empty");
  }
  std::set<std::tuple<std::string_view, std::string_view, std::string_view>> keys;
  std::set<PairId> seen_pairs;
  for (const auto& e : entries_) {
    validate_entry(e);
    if (!keys.emplace(e.model_id, e.device_id, e.group).second) {
      throw Error(ErrorKind::kDuplicateEntry, "(" + e.model_id + ", " + e.device_id +
                                                  ", " + e.group + ") appears twice");
    }
    if (seen_pairs.insert(e.pair()).second) pairs_.push_back(e.pair());
  }
}

const ProfileEntry* ProfileTable::find(const PairId& pair, std::string_view group) const {
  for (const auto& e : entries_) {
    if (e.group == group && e.model_id == pair.model_id && e.device_id == pair.device_id) {
      return &e;
    }
  }
  return nullptr;
}

std::vector<const ProfileEntry*> ProfileTable::entries_of(const PairId& pair) const {
  std::vector<const ProfileEntry*> out;
  for (const auto& e : entries_) {
    if (e.model_id == pair.model_id && e.device_id == pair.device_id) out.push_back(&e);
  }
  return out;
}

bool ProfileTable::is_partial(const GroupRules& rules) const {
  for (const auto& label : rules.labels()) {
    bool found = std::any_of(entries_.begin(), entries_.end(),
                             [&](const ProfileEntry& e) { return e.group == label; });
    if (!found) return true;
  }
  return false;
}

ProfileTable load_profile(std::istream& in, ProfileFormat format, std::string source) {
  return format == ProfileFormat::kJson ? load_json(in, std::move(source))
                                        : load_csv(in, std::move(source));
}

ProfileTable load_profile_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open profile " + path.string());
  auto format = path.extension() == ".json" ? ProfileFormat::kJson : ProfileFormat::kCsv;
  return load_profile(in, format, path.string());
}

void write_profile_csv(std::ostream& out, const ProfileTable& table) {
  out << kProfileCsvHeader << '\n';
  for (const auto& e : table.entries()) {
    out << e.model_id << ',' << e.device_id << ',' << e.framework << ',' << e.group << ','
        << format_double(e.map) << ',' << format_double(e.latency_ms) << ','
        << format_double(e.energy_mwh) << '\n';
  }
}

void write_profile_json(std::ostream& out, const ProfileTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : table.entries()) {
    rows.push_back({{"model_id", e.model_id},
                    {"device_id", e.device_id},
                    {"framework", e.framework},
                    {"group", e.group},
                    {"map", e.map},
                    {"latency_ms", e.latency_ms},
                    {"energy_mwh", e.energy_mwh}});
  }
  out << nlohmann::json{{"source", table.source()}, {"entries", rows}}.dump(2) << '\n';
}

ProfileTable filter_by_group(const ProfileTable& table, std::string_view group) {
  std::vector<ProfileEntry> out;
  std::copy_if(table.entries().begin(), table.entries().end(), std::back_inserter(out),
               [&](const ProfileEntry& e) { return e.group == group; });
  if (out.empty()) {
    throw Error(ErrorKind::kEmptyGroup,
                "no profile entries for group '" + std::string(group) + "'");
  }
  return ProfileTable(std::move(out), table.source());
}

Objective parse_objective(std::string_view name) {
  if (name == "map") return Objective::kMaxMap;
  if (name == "latency" || name == "latency_ms") return Objective::kMinLatency;
  if (name == "energy" || name == "energy_mwh") return Objective::kMinEnergy;
  throw Error(ErrorKind::kInvalidArgument, "unknown objective '" + std::string(name) + "'");
}

bool dominates(const ProfileEntry& a, const ProfileEntry& b,
               std::span<const Objective> objectives) {
  bool strictly = false;
  for (auto obj : objectives) {
    double av = 0, bv = 0;
    switch (obj) {
      case Objective::kMaxMap: av = -a.map; bv = -b.map; break;
      case Objective::kMinLatency: av = a.latency_ms; bv = b.latency_ms; break;
      case Objective::kMinEnergy: av = a.energy_mwh; bv = b.energy_mwh; break;
    }
    if (av > bv) return false;
    if (av < bv) strictly = true;
  }
  return strictly;
}

std::vector<ProfileEntry> pareto_front(std::span<const ProfileEntry> entries,
                                       std::span<const Objective> objectives) {
  if (objectives.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "pareto_front needs at least one objective");
  }
  // Any dominator sorts strictly ahead of what it dominates, and dominance is
  // transitive, so checking each candidate against the kept set suffices.
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return better_first(entries[a], entries[b], objectives);
  });
  std::vector<std::size_t> kept;
  for (auto idx : order) {
    bool dominated = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return dominates(entries[k], entries[idx], objectives);
    });
    if (!dominated) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  std::vector<ProfileEntry> out;
  out.reserve(kept.size());
  for (auto idx : kept) out.push_back(entries[idx]);
  return out;
}

ProfileTable seed_profile() {
  struct PairSeed {
    const char* model;
    const char* device;
    const char* framework;
    double latency_ms;
    double energy_mwh;
    double map[5];
  };
  // Energy and latency are per-pair constants; only mAP varies by group.
  static constexpr PairSeed kSeeds[] = {
      {"ssd_v1", "jetson_orin_nano", "tensorrt", 308, 0.227, {42.4, 46.8, 39.0, 31.0, 28.0}},
      {"ssd_v1", "pi5", "tflite", 306, 0.241, {41.0, 45.1, 37.2, 30.2, 27.1}},
      {"ssd_v1", "pi5_tpu", "tflite", 318, 0.262, {44.0, 47.0, 39.4, 34.6, 33.4}},
      {"ssd_lite", "pi5", "tflite", 395, 0.315, {43.1, 48.5, 38.9, 33.0, 31.2}},
      {"yolov8_small", "jetson_orin_nano", "tensorrt", 512, 0.468, {42.8, 47.4, 41.2, 36.1, 34.2}},
      {"yolov8_small", "pi5_ai_hat", "hef", 540, 0.409, {43.6, 48.1, 40.9, 36.5, 34.5}},
      {"ssd_lite", "pi5_tpu", "tflite", 330, 0.290, {42.0, 48.2, 38.0, 32.8, 31.0}},
  };
  static constexpr const char* kGroups[5] = {"G1", "G2", "G3", "G4", "G5"};
  std::vector<ProfileEntry> entries;
  for (const auto& s : kSeeds) {
    for (int g = 0; g < 5; ++g) {
      entries.push_back({s.model, s.device, s.framework, kGroups[g], s.map[g],
                         s.latency_ms, s.energy_mwh});
    }
  }
  return ProfileTable(std::move(entries), "builtin:seed");
}

}  // namespace edgeroute
