#include "edgeroute/router.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <tuple>

#include "edgeroute/error.hpp"

namespace edgeroute {
namespace {

struct PairScore {
  PairId pair;
  double energy = 0.0;   // mean over the pair's entries
  double latency = 0.0;  // mean over the pair's entries
  double best_map = 0.0;
};

std::vector<PairScore> score_pairs(const ProfileTable& table) {
  std::vector<PairScore> out;
  out.reserve(table.pairs().size());
  for (const auto& pair : table.pairs()) {
    PairScore s{pair, 0.0, 0.0, -1.0};
    const auto entries = table.entries_of(pair);
    for (const auto* e : entries) {
      s.energy += e->energy_mwh;
      s.latency += e->latency_ms;
      s.best_map = std::max(s.best_map, e->map);
    }
    s.energy /= static_cast<double>(entries.size());
    s.latency /= static_cast<double>(entries.size());
    out.push_back(std::move(s));
  }
  return out;
}

auto lex(const PairScore& s) { return std::tie(s.pair.model_id, s.pair.device_id); }

// Profile entry that represents `pair` for accounting: the routing group's
// entry when present, otherwise the pair's first entry.
const ProfileEntry& representative(const ProfileTable& table, const PairId& pair,
                                   const GroupLabel& group) {
  if (!group.empty()) {
    if (const auto* e = table.find(pair, group)) return *e;
  }
  return *table.entries_of(pair).front();
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kGreedyOracle: return "greedy_oracle";
    case Strategy::kGreedyEd: return "greedy_ed";
    case Strategy::kGreedySf: return "greedy_sf";
    case Strategy::kGreedyOb: return "greedy_ob";
    case Strategy::kRoundRobin: return "round_robin";
    case Strategy::kRandom: return "random";
    case Strategy::kLowestEnergy: return "lowest_energy";
    case Strategy::kLowestInference: return "lowest_inference";
    case Strategy::kHighestMap: return "highest_map";
    case Strategy::kHighestMapGroup: return "highest_map_group";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view raw, std::optional<EstimatorKind> estimator) {
  std::string name(raw);
  std::replace(name.begin(), name.end(), '-', '_');
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (name == "greedy") {
    switch (estimator.value_or(EstimatorKind::kOracle)) {
      case EstimatorKind::kOracle: return Strategy::kGreedyOracle;
      case EstimatorKind::kEd: return Strategy::kGreedyEd;
      case EstimatorKind::kSf: return Strategy::kGreedySf;
      case EstimatorKind::kOb: return Strategy::kGreedyOb;
      case EstimatorKind::kNone:
        throw Error(ErrorKind::kInvalidArgument, "greedy routing needs an estimator");
    }
  }
  static constexpr std::pair<std::string_view, Strategy> kNames[] = {
      {"greedy_oracle", Strategy::kGreedyOracle}, {"orc", Strategy::kGreedyOracle},
      {"oracle", Strategy::kGreedyOracle},        {"greedy_ed", Strategy::kGreedyEd},
      {"ed", Strategy::kGreedyEd},                {"greedy_sf", Strategy::kGreedySf},
      {"sf", Strategy::kGreedySf},                {"greedy_ob", Strategy::kGreedyOb},
      {"ob", Strategy::kGreedyOb},                {"round_robin", Strategy::kRoundRobin},
      {"rr", Strategy::kRoundRobin},              {"random", Strategy::kRandom},
      {"rnd", Strategy::kRandom},                 {"lowest_energy", Strategy::kLowestEnergy},
      {"le", Strategy::kLowestEnergy},            {"lowest_inference", Strategy::kLowestInference},
      {"li", Strategy::kLowestInference},         {"highest_map", Strategy::kHighestMap},
      {"hm", Strategy::kHighestMap},              {"highest_map_group", Strategy::kHighestMapGroup},
      {"hmg", Strategy::kHighestMapGroup},
  };
  for (const auto& [n, s] : kNames) {
    if (n == name) return s;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown strategy '" + std::string(raw) + "'");
}

EstimatorKind default_estimator(Strategy s) {
  switch (s) {
    case Strategy::kGreedyOracle: return EstimatorKind::kOracle;
    case Strategy::kGreedyEd: return EstimatorKind::kEd;
    case Strategy::kGreedySf: return EstimatorKind::kSf;
    case Strategy::kGreedyOb: return EstimatorKind::kOb;
    case Strategy::kHighestMapGroup: return EstimatorKind::kOracle;
    default: return EstimatorKind::kNone;
  }
}

bool is_greedy(Strategy s) {
  return s == Strategy::kGreedyOracle || s == Strategy::kGreedyEd || s == Strategy::kGreedySf ||
         s == Strategy::kGreedyOb;
}

bool needs_count(Strategy s) { return is_greedy(s) || s == Strategy::kHighestMapGroup; }

bool precedes(const ProfileEntry& a, const ProfileEntry& b) {
  if (a.energy_mwh != b.energy_mwh) return a.energy_mwh < b.energy_mwh;
  if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
  if (a.map != b.map) return a.map > b.map;
  return std::tie(a.model_id, a.device_id) < std::tie(b.model_id, b.device_id);
}

RoutingDecision route_greedy(const ProfileTable& table, std::uint64_t count,
                             const RoutingConfig& cfg, Strategy label) {
  if (!(cfg.delta_map >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "delta_map must be >= 0");
  }
  RoutingDecision d;
  d.strategy = label;
  d.estimated_count = count;
  d.group = cfg.rules.group_of(count);

  auto in_scope = [&](const ProfileEntry& e) { return d.fallback_used || e.group == d.group; };
  bool any = std::any_of(table.entries().begin(), table.entries().end(),
                         [&](const ProfileEntry& e) { return e.group == d.group; });
  if (!any) {
    if (cfg.fallback == FallbackPolicy::kError) {
      throw Error(ErrorKind::kEmptyGroup, "no profile entries for group '" + d.group + "'");
    }
    d.fallback_used = true;
  }

  double map_max = -std::numeric_limits<double>::infinity();
  for (const auto& e : table.entries()) {
    if (in_scope(e)) map_max = std::max(map_max, e.map);
  }
  d.map_max = map_max;
  d.map_floor = map_max - cfg.delta_map;

  const ProfileEntry* best = nullptr;
  for (const auto& e : table.entries()) {
    if (!in_scope(e) || e.map < d.map_floor) continue;
    ++d.feasible_count;
    if (!best || precedes(e, *best)) best = &e;
  }
  d.pair = best->pair();
  d.entry_group = best->group;
  return d;
}

RoutingDecision route_baseline(Strategy strategy, const ProfileTable& table,
                               std::optional<std::uint64_t> count, const RoutingConfig& cfg,
                               BaselineState& state) {
  if (is_greedy(strategy)) {
    throw Error(ErrorKind::kInvalidArgument, "greedy strategies are not baselines");
  }
  if (strategy == Strategy::kHighestMapGroup) {
    if (!count) {
      throw Error(ErrorKind::kMissingGroundTruth, "highest_map_group needs an object count");
    }
    RoutingConfig strict = cfg;
    strict.delta_map = 0.0;
    return route_greedy(table, *count, strict, Strategy::kHighestMapGroup);
  }

  const auto scores = score_pairs(table);
  std::size_t pick = 0;
  switch (strategy) {
    case Strategy::kRoundRobin:
      pick = state.rr_cursor % scores.size();
      state.rr_cursor = (pick + 1) % scores.size();
      break;
    case Strategy::kRandom: {
      std::uniform_int_distribution<std::size_t> dist(0, scores.size() - 1);
      pick = dist(state.rng);
      break;
    }
    case Strategy::kLowestEnergy:
      pick = static_cast<std::size_t>(
          std::min_element(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
            return std::tuple(a.energy, a.latency, -a.best_map, lex(a)) <
                   std::tuple(b.energy, b.latency, -b.best_map, lex(b));
          }) - scores.begin());
      break;
    case Strategy::kLowestInference:
      pick = static_cast<std::size_t>(
          std::min_element(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
            return std::tuple(a.latency, a.energy, -a.best_map, lex(a)) <
                   std::tuple(b.latency, b.energy, -b.best_map, lex(b));
          }) - scores.begin());
      break;
    case Strategy::kHighestMap:
      pick = static_cast<std::size_t>(
          std::min_element(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
            return std::tuple(-a.best_map, a.energy, a.latency, lex(a)) <
                   std::tuple(-b.best_map, b.energy, b.latency, lex(b));
          }) - scores.begin());
      break;
    default:
      break;
  }

  // The count only labels the accounting group; it is not an estimate here.
  RoutingDecision d;
  d.strategy = strategy;
  if (count) d.group = cfg.rules.group_of(*count);
  d.pair = scores[pick].pair;
  const auto& entry = representative(table, d.pair, d.group);
  d.entry_group = entry.group;
  d.map_max = entry.map;
  d.map_floor = entry.map;
  d.feasible_count = scores.size();
  return d;
}

RoutingDecision route(Strategy strategy, const ProfileTable& table,
                      std::optional<std::uint64_t> count, const RoutingConfig& cfg,
                      BaselineState& state) {
  if (is_greedy(strategy)) {
    if (!count) {
      throw Error(ErrorKind::kMissingGroundTruth,
                  std::string(to_string(strategy)) + " needs an object count");
    }
    return route_greedy(table, *count, cfg, strategy);
  }
  return route_baseline(strategy, table, count, cfg, state);
}

}  // namespace edgeroute
