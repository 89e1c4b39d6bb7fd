#include "edgeroute/pipeline.hpp"

#include <charconv>

#include "edgeroute/error.hpp"

namespace edgeroute {

double EstimatorConfig::fixed_overhead_ms(EstimatorKind k) const {
  auto it = deterministic_overhead_ms.find(k);
  return it == deterministic_overhead_ms.end() ? 0.0 : it->second;
}

std::shared_ptr<DetectorHandle> open_detector(const EstimatorConfig& cfg) {
  if (!cfg.detector_address.empty()) {
    const auto colon = cfg.detector_address.rfind(':');
    std::uint16_t port = 0;
    if (colon == std::string::npos ||
        std::from_chars(cfg.detector_address.data() + colon + 1,
                        cfg.detector_address.data() + cfg.detector_address.size(), port)
                .ec != std::errc()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "detector address must be host:port, got '" + cfg.detector_address + "'");
    }
    return std::make_shared<DetectorHandle>(DetectorHandle::connect_tcp(
        cfg.detector_address.substr(0, colon), port, cfg.detector_timeout));
  }
  if (!cfg.detector_command.empty()) {
    return std::make_shared<DetectorHandle>(
        DetectorHandle::spawn(cfg.detector_command, cfg.detector_timeout));
  }
  throw Error(ErrorKind::kDetectorUnavailable, "no front-end detector configured");
}

GatewayPipeline::GatewayPipeline(std::shared_ptr<const ProfileTable> table, RoutingConfig routing,
                                 EstimatorConfig estimators, std::shared_ptr<Backend> backend,
                                 bool deterministic, std::shared_ptr<DetectorHandle> detector)
    : table_(std::move(table)),
      routing_(std::move(routing)),
      estimators_(std::move(estimators)),
      backend_(std::move(backend)),
      deterministic_(deterministic),
      detector_(std::move(detector)) {
  if (!table_ || !backend_) {
    throw Error(ErrorKind::kInvalidArgument, "pipeline needs a profile table and a backend");
  }
  if (!(routing_.delta_map >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "delta_map must be >= 0");
  }
}

CountEstimate GatewayPipeline::estimate(const Request& req, EstimatorKind kind,
                                        const StreamState& state) {
  CountEstimate est;
  switch (kind) {
    case EstimatorKind::kNone:
      est = {0, EstimatorKind::kNone, 0.0, 0.0};
      break;
    case EstimatorKind::kOracle:
      est = estimate_count_oracle(req);
      break;
    case EstimatorKind::kOb:
      est = state.ob.estimate();
      break;
    case EstimatorKind::kEd:
      if (req.inline_image) {
        est = estimate_count_ed(*req.inline_image, estimators_.ed, estimators_.gateway_power_w);
      } else {
        est = estimate_count_ed(read_pnm(req.image_ref), estimators_.ed,
                                estimators_.gateway_power_w);
      }
      break;
    case EstimatorKind::kSf:
      if (!detector_) {
        throw Error(ErrorKind::kDetectorUnavailable, "no front-end detector attached");
      }
      if (req.image_ref.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "the front-end detector needs an image path");
      }
      est = estimate_count_sf(req.image_ref, *detector_, estimators_.gateway_power_w);
      break;
  }
  if (deterministic_) {
    est.overhead_ms = estimators_.fixed_overhead_ms(kind);
    est.overhead_mwh = energy_mwh_for(estimators_.gateway_power_w, est.overhead_ms);
  }
  return est;
}

RequestRecord GatewayPipeline::complete(const Request& req, const CountEstimate& est,
                                        Strategy strategy, StreamState& state) {
  RequestRecord rec;
  rec.request_id = req.id;
  rec.stream_id = req.stream_id;
  rec.truth_count = req.truth_count;
  if (req.truth_count) rec.true_group = routing_.rules.group_of(*req.truth_count);
  rec.estimate = est;

  // Count-independent strategies see the true count only as a label for the
  // accounting group; their choice does not depend on it.
  std::optional<std::uint64_t> count;
  if (est.method == EstimatorKind::kNone) {
    count = req.truth_count;
  } else {
    count = est.count;
  }

  const auto start = std::chrono::steady_clock::now();
  rec.decision = route(strategy, *table_, count, routing_, state.baseline);
  if (!deterministic_) {
    rec.decision.decision_overhead_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rec.decision.decision_overhead_mwh =
        energy_mwh_for(estimators_.gateway_power_w, rec.decision.decision_overhead_ms);
  }

  rec.response = backend_->dispatch(rec.decision, req);
  state.ob.observe(rec.response);

  rec.gateway_ms = est.overhead_ms + rec.decision.decision_overhead_ms;
  rec.gateway_mwh = est.overhead_mwh + rec.decision.decision_overhead_mwh;
  rec.request_at_ms = state.clock_ms;
  rec.response_at_ms = state.clock_ms + rec.latency_ms();
  state.clock_ms = rec.response_at_ms;

  if (!rec.true_group.empty()) {
    if (const auto* e = table_->find(rec.decision.pair, rec.true_group)) rec.credited_map = e->map;
  }
  return rec;
}

}  // namespace edgeroute
