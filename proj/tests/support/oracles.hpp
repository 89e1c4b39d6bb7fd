#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "edgeroute/profile.hpp"

namespace edgeroute::testkit {

struct RandomTableOptions {
  std::size_t min_entries = 5;
  std::size_t max_entries = 64;
  std::size_t min_groups = 1;
  std::size_t max_groups = 5;
  // Values come from coarse grids so ties are common.
  bool coarse = true;
};

/// Random valid table using labels G1..Gk. Pairs may miss some groups.
ProfileTable random_table(std::mt19937_64& rng, const RandomTableOptions& opts = {});

/// Exhaustive reference for delta-mAP routing: sorts every group member by
/// (energy, latency, -map, model, device) and returns the first one whose mAP
/// is within delta of the group's best. nullopt for an empty group.
std::optional<ProfileEntry> route_reference_bruteforce(const std::vector<ProfileEntry>& entries,
                                                       const std::string& group, double delta);

/// O(n^2) pairwise Pareto filter over (map up, latency down, energy down),
/// restricted to the objectives flagged on.
std::vector<ProfileEntry> pareto_bruteforce(const std::vector<ProfileEntry>& entries, bool use_map,
                                            bool use_latency, bool use_energy);

/// Default group label for a count, written out longhand.
std::string default_group_label(std::uint64_t count);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace edgeroute::testkit
