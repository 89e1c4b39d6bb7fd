#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeroute/backend.hpp"
#include "edgeroute/metrics.hpp"
#include "edgeroute/pipeline.hpp"
#include "edgeroute/workload.hpp"

namespace edgeroute {

/// Everything a replay needs besides the workload and the strategy.
struct ReplayConfig {
  std::shared_ptr<const ProfileTable> table;
  RoutingConfig routing;
  EstimatorConfig estimators;
  BackendConfig backend;
  std::vector<DeviceIdlePower> idle_powers;
  bool deterministic = false;
  bool keep_log = true;
  /// Shared front-end detector; opened from `estimators` on demand when null.
  std::shared_ptr<DetectorHandle> detector;
};

struct SkippedRequest {
  std::uint64_t request_id = 0;
  std::string item_id;
  std::string reason;
};

struct ExperimentReport {
  std::string strategy;
  std::string estimator;
  double delta_map = 0.0;
  std::string workload;
  std::string profile_source;
  std::string rules;
  std::uint64_t rnd_seed = 0;
  std::uint64_t fidelity_seed = 0;
  bool deterministic = false;
  nlohmann::json config;  // frozen run configuration, written to the header when set
  MetricsSnapshot metrics;
  double idle_baseline_mwh = 0.0;  // reported separately, never added in
  std::vector<RequestRecord> log;
  std::vector<SkippedRequest> skipped;
};

/// Closed-loop replay of one stream: request i+1 is issued only after
/// response i. Estimator faults skip the request (and are counted); routing
/// and backend errors abort.
ExperimentReport replay(const WorkloadManifest& workload, Strategy strategy, EstimatorKind estimator,
                        const ReplayConfig& cfg);

struct StrategySpec {
  Strategy strategy;
  EstimatorKind estimator;
};

/// One replay per (strategy, delta), all with the same seeds.
std::vector<ExperimentReport> sweep_delta(const WorkloadManifest& workload,
                                          const std::vector<StrategySpec>& strategies,
                                          const std::vector<double>& deltas,
                                          const ReplayConfig& cfg);

nlohmann::json to_json(const RoutingDecision& d);
nlohmann::json to_json(const RequestRecord& r);
nlohmann::json to_json(const MetricsSnapshot& m);
nlohmann::json to_json(const ExperimentReport& r);

/// Parses the header and metrics block of a report (the log is not restored).
ExperimentReport report_from_json(const nlohmann::json& doc);

inline constexpr std::string_view kSummaryHeader =
    "strategy,delta,energy_mwh,latency_s,modeled_map,gateway_mwh,gateway_ms";
void write_summary_csv(std::ostream& out, const std::vector<ExperimentReport>& reports);

/// "<strategy>_<estimator>_d<delta>.json"
std::string report_file_name(const ExperimentReport& r);
void write_report(const std::filesystem::path& path, const ExperimentReport& r);

}  // namespace edgeroute
