#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgeroute/estimators.hpp"
#include "edgeroute/profile.hpp"
#include "edgeroute/router.hpp"
#include "edgeroute/types.hpp"

namespace edgeroute {

/// Everything that happened to one request.
struct RequestRecord {
  std::uint64_t request_id = 0;
  std::string item_id;
  std::string stream_id;
  std::optional<std::uint64_t> truth_count;
  GroupLabel true_group;  // empty without ground truth
  CountEstimate estimate;
  RoutingDecision decision;
  DetectionResponse response;
  double gateway_ms = 0.0;   // estimation + routing
  double gateway_mwh = 0.0;
  double request_at_ms = 0.0;   // virtual clock
  double response_at_ms = 0.0;
  std::optional<double> credited_map;  // profile mAP of (pair, true group)

  double latency_ms() const { return gateway_ms + response.network_ms + response.inference_ms; }
};

struct MetricsSnapshot {
  std::uint64_t requests = 0;
  std::uint64_t skipped = 0;
  double backend_energy_mwh = 0.0;
  double gateway_energy_mwh = 0.0;
  double gateway_ms = 0.0;
  double network_ms = 0.0;
  double inference_ms = 0.0;
  double total_latency_ms = 0.0;  // sum of per-request latency_ms()
  double map_sum = 0.0;
  std::uint64_t map_count = 0;
  std::uint64_t switch_count = 0;
  std::map<GroupLabel, std::map<std::string, std::uint64_t>> decisions_by_group;

  double dynamic_energy_mwh() const { return backend_energy_mwh + gateway_energy_mwh; }
  double total_latency_s() const { return total_latency_ms / 1000.0; }
  double modeled_map() const { return map_count ? map_sum / static_cast<double>(map_count) : 0.0; }
};

/// Running totals over a request stream. Not synchronized; the service wraps
/// it in a mutex.
class MetricsAccumulator {
 public:
  void add(const RequestRecord& r);
  void add_skipped() { ++snap_.skipped; }
  const MetricsSnapshot& snapshot() const { return snap_; }

 private:
  MetricsSnapshot snap_;
  std::optional<PairId> last_pair_;
};

/// Mean profile mAP of each decision's pair on the request's true group.
/// Throws MissingGroundTruth for records without a true group and
/// MissingProfileCell when the pair was never profiled on that group.
double modeled_accuracy(std::span<const RequestRecord> log, const ProfileTable& table);

}  // namespace edgeroute
