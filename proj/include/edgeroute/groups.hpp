#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgeroute {

using GroupLabel = std::string;

/// Inclusive object-count range; `hi == nullopt` means open-ended above.
struct GroupRule {
  std::uint64_t lo = 0;
  std::optional<std::uint64_t> hi;
  GroupLabel label;

  bool contains(std::uint64_t count) const {
    return count >= lo && (!hi || count <= *hi);
  }
};

/// Ordered count-range -> label mapping. The constructor enforces that ranges
/// are ascending, disjoint and cover every non-negative integer, so group_of
/// is total.
class GroupRules {
 public:
  explicit GroupRules(std::vector<GroupRule> rules);

  /// [0,0]->G1, [1,1]->G2, [2,2]->G3, [3,3]->G4, [4,inf)->G5
  static GroupRules defaults();

  /// Parses "0:G1,1:G2,2:G3,3:G4,4+:G5"; a range may also be "5-9:Label".
  static GroupRules parse(std::string_view text);

  const GroupLabel& group_of(std::uint64_t count) const;

  /// Labels in rule order (duplicates removed, first occurrence kept).
  std::vector<GroupLabel> labels() const;

  /// Position of `label` in labels(), or nullopt.
  std::optional<std::size_t> index_of(std::string_view label) const;

  const std::vector<GroupRule>& rules() const { return rules_; }

  std::string to_string() const;

 private:
  std::vector<GroupRule> rules_;
};

}  // namespace edgeroute
