#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "edgeroute/estimators.hpp"
#include "edgeroute/groups.hpp"
#include "edgeroute/profile.hpp"

namespace edgeroute {

enum class Strategy {
  kGreedyOracle,
  kGreedyEd,
  kGreedySf,
  kGreedyOb,
  kRoundRobin,
  kRandom,
  kLowestEnergy,
  kLowestInference,
  kHighestMap,
  kHighestMapGroup,
};

std::string_view to_string(Strategy s);

/// Accepts canonical names ("greedy_ed", "highest_map_group"), dashed forms
/// ("greedy-ed"), short names (orc, ed, sf, ob, rr, rnd, le, li, hm, hmg) and
/// bare "greedy" combined with `estimator`.
Strategy parse_strategy(std::string_view name,
                        std::optional<EstimatorKind> estimator = std::nullopt);

/// Estimator a strategy consumes by default. Count-independent baselines
/// return kNone; HMG consumes the ground-truth count.
EstimatorKind default_estimator(Strategy s);
bool is_greedy(Strategy s);
bool needs_count(Strategy s);

enum class FallbackPolicy { kError, kGlobalTable };

struct RoutingConfig {
  double delta_map = 0.0;  // absolute mAP points
  GroupRules rules = GroupRules::defaults();
  FallbackPolicy fallback = FallbackPolicy::kError;
  std::uint64_t rnd_seed = 0;
};

struct RoutingDecision {
  PairId pair;
  GroupLabel group;        // routing group; empty when the strategy saw no count
  GroupLabel entry_group;  // group of the profile entry that was selected
  std::optional<std::uint64_t> estimated_count;
  double map_max = 0.0;
  double map_floor = 0.0;
  std::size_t feasible_count = 0;
  Strategy strategy = Strategy::kGreedyOracle;
  bool fallback_used = false;
  double decision_overhead_ms = 0.0;
  double decision_overhead_mwh = 0.0;

  bool operator==(const RoutingDecision&) const = default;
};

/// Total order used whenever several entries are equally good: lower energy,
/// then lower latency, then higher mAP, then (model_id, device_id).
bool precedes(const ProfileEntry& a, const ProfileEntry& b);

/// Minimum-energy entry among the group's entries whose mAP is within
/// delta_map of the group maximum. Throws EmptyGroup under the error
/// fallback; with the global-table fallback the whole table is searched and
/// the decision is flagged.
RoutingDecision route_greedy(const ProfileTable& table, std::uint64_t count,
                             const RoutingConfig& cfg,
                             Strategy label = Strategy::kGreedyOracle);

/// Per-stream state of the stateful baselines.
struct BaselineState {
  explicit BaselineState(std::uint64_t seed = 0) : rng(seed) {}

  std::size_t rr_cursor = 0;
  std::mt19937_64 rng;
};

/// Round robin, random, lowest energy, lowest inference time, highest mAP and
/// highest mAP per group. Count-independent strategies score each distinct
/// pair by its mean energy and latency across groups and by its best mAP.
/// For those, map_max and map_floor carry the selected entry's mAP and
/// feasible_count the number of candidate pairs.
RoutingDecision route_baseline(Strategy strategy, const ProfileTable& table,
                               std::optional<std::uint64_t> count, const RoutingConfig& cfg,
                               BaselineState& state);

/// Dispatches to route_greedy or route_baseline.
RoutingDecision route(Strategy strategy, const ProfileTable& table,
                      std::optional<std::uint64_t> count, const RoutingConfig& cfg,
                      BaselineState& state);

}  // namespace edgeroute
