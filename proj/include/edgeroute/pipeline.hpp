#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edgeroute/backend.hpp"
#include "edgeroute/detector.hpp"
#include "edgeroute/estimators.hpp"
#include "edgeroute/metrics.hpp"
#include "edgeroute/router.hpp"

namespace edgeroute {

struct EstimatorConfig {
  EdParams ed;
  std::vector<std::string> detector_command;  // spawn mode
  std::string detector_address;               // "host:port", socket mode
  std::chrono::milliseconds detector_timeout{5000};
  std::uint64_t ob_default = 0;
  double gateway_power_w = 5.0;
  /// Wall time charged per estimator in deterministic mode.
  std::map<EstimatorKind, double> deterministic_overhead_ms = {
      {EstimatorKind::kNone, 0.0}, {EstimatorKind::kOracle, 0.0}, {EstimatorKind::kOb, 0.0},
      {EstimatorKind::kEd, 2.0},   {EstimatorKind::kSf, 12.0}};

  double fixed_overhead_ms(EstimatorKind k) const;
};

/// Opens the configured front-end detector (socket address wins over the
/// spawn command). Throws DetectorUnavailable when neither is configured.
std::shared_ptr<DetectorHandle> open_detector(const EstimatorConfig& cfg);

/// Per-stream mutable state; one writer at a time.
struct StreamState {
  explicit StreamState(std::uint64_t ob_default = 0, std::uint64_t rnd_seed = 0)
      : ob(ob_default), baseline(rnd_seed) {}

  ObEstimator ob;
  BaselineState baseline;
  double clock_ms = 0.0;
  std::uint64_t next_request_id = 1;
};

/// One request's path through the gateway: estimate -> route -> dispatch ->
/// observe. Shared by offline replays and the live service so both make the
/// same decisions for the same inputs.
class GatewayPipeline {
 public:
  GatewayPipeline(std::shared_ptr<const ProfileTable> table, RoutingConfig routing,
                  EstimatorConfig estimators, std::shared_ptr<Backend> backend,
                  bool deterministic, std::shared_ptr<DetectorHandle> detector = nullptr);

  /// Estimation step alone; faults surface as Error.
  CountEstimate estimate(const Request& req, EstimatorKind kind, const StreamState& state);

  /// Routes, dispatches and updates stream state for an estimated request.
  RequestRecord complete(const Request& req, const CountEstimate& estimate, Strategy strategy,
                         StreamState& state);

  RequestRecord process(const Request& req, Strategy strategy, EstimatorKind kind,
                        StreamState& state) {
    return complete(req, estimate(req, kind, state), strategy, state);
  }

  const ProfileTable& table() const { return *table_; }
  std::shared_ptr<const ProfileTable> table_ptr() const { return table_; }
  const RoutingConfig& routing() const { return routing_; }
  const EstimatorConfig& estimators() const { return estimators_; }
  bool deterministic() const { return deterministic_; }

 private:
  std::shared_ptr<const ProfileTable> table_;
  RoutingConfig routing_;
  EstimatorConfig estimators_;
  std::shared_ptr<Backend> backend_;
  bool deterministic_;
  std::shared_ptr<DetectorHandle> detector_;
};

}  // namespace edgeroute
