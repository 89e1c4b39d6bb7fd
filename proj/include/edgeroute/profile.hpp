#pragma once

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgeroute/groups.hpp"

namespace edgeroute {

/// A model deployed on a device; the unit of routing choice.
struct PairId {
  std::string model_id;
  std::string device_id;

  auto operator<=>(const PairId&) const = default;
  bool operator==(const PairId&) const = default;

  /// "model_id@device_id"
  std::string to_string() const;
  static PairId parse(std::string_view text);
};

/// Profiled accuracy and cost of one pair on one object-count group.
/// mAP is in points on a 0-100 scale.
struct ProfileEntry {
  std::string model_id;
  std::string device_id;
  std::string framework;
  GroupLabel group;
  double map = 0.0;
  double latency_ms = 0.0;
  double energy_mwh = 0.0;

  PairId pair() const { return {model_id, device_id}; }
  bool operator==(const ProfileEntry&) const = default;
};

/// Throws MalformedRow describing the first violated field invariant.
void validate_entry(const ProfileEntry& e);

/// Immutable, validated profiling table. Safe to share across threads.
class ProfileTable {
 public:
  /// Validates every entry and key uniqueness. Throws EmptyTable when
  /// `entries` is empty.
  ProfileTable(std::vector<ProfileEntry> entries, std::string source);

  const std::vector<ProfileEntry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }
  std::size_t size() const { return entries_.size(); }

  /// Entry for (pair, group) or nullptr.
  const ProfileEntry* find(const PairId& pair, std::string_view group) const;

  /// Distinct pairs in first-appearance order.
  const std::vector<PairId>& pairs() const { return pairs_; }

  /// Entries of `pair`, in table order.
  std::vector<const ProfileEntry*> entries_of(const PairId& pair) const;

  /// True when some label in `rules` has no entry in the table.
  bool is_partial(const GroupRules& rules) const;

  bool operator==(const ProfileTable& o) const { return entries_ == o.entries_; }

 private:
  std::vector<ProfileEntry> entries_;
  std::string source_;
  std::vector<PairId> pairs_;
};

enum class ProfileFormat { kCsv, kJson };

inline constexpr std::string_view kProfileCsvHeader =
    "model_id,device_id,framework,group,map,latency_ms,energy_mwh";

/// Errors: MalformedRow (with line and column), DuplicateEntry, EmptyTable.
ProfileTable load_profile(std::istream& in, ProfileFormat format,
                          std::string source = "<stream>");
/// Format chosen from the extension (.json -> JSON, else CSV).
ProfileTable load_profile_file(const std::filesystem::path& path);

void write_profile_csv(std::ostream& out, const ProfileTable& table);
void write_profile_json(std::ostream& out, const ProfileTable& table);

/// Entries whose group equals `group`, order preserved. Throws EmptyGroup.
ProfileTable filter_by_group(const ProfileTable& table, std::string_view group);

enum class Objective { kMaxMap, kMinLatency, kMinEnergy };

Objective parse_objective(std::string_view name);

/// True when `a` is at least as good as `b` on every objective and strictly
/// better on at least one.
bool dominates(const ProfileEntry& a, const ProfileEntry& b,
               std::span<const Objective> objectives);

/// Non-dominated subset, input order preserved. Sort-and-sweep for two
/// objectives, pairwise otherwise.
std::vector<ProfileEntry> pareto_front(std::span<const ProfileEntry> entries,
                                       std::span<const Objective> objectives);

/// Built-in table seeded from the testbed selection: 7 pairs x 5 groups.
ProfileTable seed_profile();

}  // namespace edgeroute
