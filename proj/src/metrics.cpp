#include "edgeroute/metrics.hpp"

#include "edgeroute/error.hpp"

namespace edgeroute {

void MetricsAccumulator::add(const RequestRecord& r) {
  ++snap_.requests;
  snap_.backend_energy_mwh += r.response.energy_mwh;
  snap_.gateway_energy_mwh += r.gateway_mwh;
  snap_.gateway_ms += r.gateway_ms;
  snap_.network_ms += r.response.network_ms;
  snap_.inference_ms += r.response.inference_ms;
  snap_.total_latency_ms += r.latency_ms();
  if (r.credited_map) {
    snap_.map_sum += *r.credited_map;
    ++snap_.map_count;
  }
  if (last_pair_ && *last_pair_ != r.decision.pair) ++snap_.switch_count;
  last_pair_ = r.decision.pair;
  const auto& group = r.true_group.empty() ? r.decision.group : r.true_group;
  ++snap_.decisions_by_group[group][r.decision.pair.to_string()];
}

double modeled_accuracy(std::span<const RequestRecord> log, const ProfileTable& table) {
  if (log.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : log) {
    if (r.true_group.empty()) {
      throw Error(ErrorKind::kMissingGroundTruth,
                  "request " + std::to_string(r.request_id) + " has no true group");
    }
    const auto* e = table.find(r.decision.pair, r.true_group);
    if (!e) {
      throw Error(ErrorKind::kMissingProfileCell,
                  r.decision.pair.to_string() + " has no entry for group '" + r.true_group + "'");
    }
    sum += e->map;
  }
  return sum / static_cast<double>(log.size());
}

}  // namespace edgeroute
