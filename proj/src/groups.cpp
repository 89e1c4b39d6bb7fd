#include "edgeroute/groups.hpp"

#include <algorithm>
#include <charconv>

#include "edgeroute/error.hpp"

namespace edgeroute {
namespace {

std::uint64_t parse_u64(std::string_view text, std::string_view context) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "bad count '" + std::string(text) + "' in group rule '" +
                    std::string(context) + "'");
  }
  return value;
}

}  // namespace

GroupRules::GroupRules(std::vector<GroupRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "group rules are empty");
  }
  std::uint64_t expected = 0;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& r = rules_[i];
    if (r.label.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "group rule with empty label");
    }
    if (r.lo != expected) {
      throw Error(ErrorKind::kInvalidArgument,
                  "group rules must be ascending and contiguous from 0; rule '" +
                      r.label + "' starts at " + std::to_string(r.lo) +
                      ", expected " + std::to_string(expected));
    }
    if (r.hi && *r.hi < r.lo) {
      throw Error(ErrorKind::kInvalidArgument,
                  "group rule '" + r.label + "' has an empty range");
    }
    if (!r.hi) {
      if (i + 1 != rules_.size()) {
        throw Error(ErrorKind::kInvalidArgument,
                    "only the last group rule may be open-ended");
      }
      return;
    }
    expected = *r.hi + 1;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "group rules must end with an open-ended range");
}

GroupRules GroupRules::defaults() {
  return GroupRules({{0, 0, "G1"},
                     {1, 1, "G2"},
                     {2, 2, "G3"},
                     {3, 3, "G4"},
                     {4, std::nullopt, "G5"}});
}

GroupRules GroupRules::parse(std::string_view text) {
  std::vector<GroupRule> rules;
  while (!text.empty()) {
    auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::kInvalidArgument,
                  "group rule '" + std::string(item) + "' lacks ':'");
    }
    std::string_view range = item.substr(0, colon);
    GroupRule rule;
    rule.label = std::string(item.substr(colon + 1));
    if (!range.empty() && range.back() == '+') {
      rule.lo = parse_u64(range.substr(0, range.size() - 1), item);
    } else if (auto dash = range.find('-'); dash != std::string_view::npos) {
      rule.lo = parse_u64(range.substr(0, dash), item);
      rule.hi = parse_u64(range.substr(dash + 1), item);
    } else {
      rule.lo = parse_u64(range, item);
      rule.hi = rule.lo;
    }
    rules.push_back(std::move(rule));
  }
  return GroupRules(std::move(rules));
}

const GroupLabel& GroupRules::group_of(std::uint64_t count) const {
  for (const auto& r : rules_) {
    if (r.contains(count)) return r.label;
  }
  // Unreachable: the constructor guarantees coverage.
  return rules_.back().label;
}

std::vector<GroupLabel> GroupRules::labels() const {
  std::vector<GroupLabel> out;
  for (const auto& r : rules_) {
    if (std::find(out.begin(), out.end(), r.label) == out.end()) {
      out.push_back(r.label);
    }
  }
  return out;
}

std::optional<std::size_t> GroupRules::index_of(std::string_view label) const {
  auto all = labels();
  auto it = std::find(all.begin(), all.end(), label);
  if (it == all.end()) return std::nullopt;
  return static_cast<std::size_t>(it - all.begin());
}

std::string GroupRules::to_string() const {
  std::string out;
  for (const auto& r : rules_) {
    if (!out.empty()) out += ',';
    if (!r.hi) {
      out += std::to_string(r.lo) + "+";
    } else if (*r.hi == r.lo) {
      out += std::to_string(r.lo);
    } else {
      out += std::to_string(r.lo) + "-" + std::to_string(*r.hi);
    }
    out += ':' + r.label;
  }
  return out;
}

}  // namespace edgeroute
