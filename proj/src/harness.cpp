#include "edgeroute/harness.hpp"

#include <fstream>
#include <ostream>

#include "edgeroute/error.hpp"
#include "edgeroute/format.hpp"

namespace edgeroute {

ExperimentReport replay(const WorkloadManifest& workload, Strategy strategy, EstimatorKind estimator,
                        const ReplayConfig& cfg) {
  if (!cfg.table) throw Error(ErrorKind::kInvalidArgument, "replay needs a profile table");
  auto detector = cfg.detector;
  if (estimator == EstimatorKind::kSf && !detector) detector = open_detector(cfg.estimators);

  auto backend = std::make_shared<Backend>(cfg.table, cfg.backend);
  GatewayPipeline pipeline(cfg.table, cfg.routing, cfg.estimators, backend, cfg.deterministic,
                           detector);
  StreamState state(cfg.estimators.ob_default, cfg.routing.rnd_seed);
  MetricsAccumulator acc;

  ExperimentReport report;
  report.strategy = std::string(to_string(strategy));
  report.estimator = std::string(to_string(estimator));
  report.delta_map = cfg.routing.delta_map;
  report.workload = workload.name;
  report.profile_source = cfg.table->source();
  report.rules = cfg.routing.rules.to_string();
  report.rnd_seed = cfg.routing.rnd_seed;
  report.fidelity_seed = cfg.backend.fidelity.seed;
  report.deterministic = cfg.deterministic;

  for (const auto& item : workload.items) {
    Request req;
    req.id = state.next_request_id++;
    req.image_ref = item.image;
    req.truth_count = item.truth_count;
    req.stream_id = workload.name;

    CountEstimate est;
    try {
      est = pipeline.estimate(req, estimator, state);
    } catch (const Error& ex) {
      acc.add_skipped();
      report.skipped.push_back({req.id, item.id, ex.what()});
      continue;
    }
    RequestRecord rec = pipeline.complete(req, est, strategy, state);
    rec.item_id = item.id;
    if (!rec.true_group.empty() && !rec.credited_map) {
      throw Error(ErrorKind::kMissingProfileCell, rec.decision.pair.to_string() +
                                                      " has no entry for group '" +
                                                      rec.true_group + "'");
    }
    acc.add(rec);
    if (cfg.keep_log) report.log.push_back(std::move(rec));
  }
  report.metrics = acc.snapshot();
  report.idle_baseline_mwh = idle_baseline(report.metrics.total_latency_s(), cfg.idle_powers);
  return report;
}

std::vector<ExperimentReport> sweep_delta(const WorkloadManifest& workload,
                                          const std::vector<StrategySpec>& strategies,
                                          const std::vector<double>& deltas,
                                          const ReplayConfig& cfg) {
  for (double d : deltas) {
    if (!(d >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "deltas must be non-negative");
  }
  std::vector<ExperimentReport> out;
  for (const auto& spec : strategies) {
    for (double d : deltas) {
      ReplayConfig cell = cfg;
      cell.routing.delta_map = d;
      out.push_back(replay(workload, spec.strategy, spec.estimator, cell));
    }
  }
  return out;
}

nlohmann::json to_json(const RoutingDecision& d) {
  nlohmann::json j{{"pair", {{"model_id", d.pair.model_id}, {"device_id", d.pair.device_id}}},
                   {"group", d.group},
                   {"entry_group", d.entry_group},
                   {"map_max", d.map_max},
                   {"map_floor", d.map_floor},
                   {"feasible_count", d.feasible_count},
                   {"strategy", to_string(d.strategy)},
                   {"fallback_used", d.fallback_used},
                   {"decision_overhead_ms", d.decision_overhead_ms},
                   {"decision_overhead_mwh", d.decision_overhead_mwh}};
  j["estimated_count"] = d.estimated_count ? nlohmann::json(*d.estimated_count) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const RequestRecord& r) {
  nlohmann::json j{
      {"request_id", r.request_id},
      {"item_id", r.item_id},
      {"stream_id", r.stream_id},
      {"true_group", r.true_group},
      {"estimate",
       {{"count", r.estimate.count},
        {"method", to_string(r.estimate.method)},
        {"overhead_ms", r.estimate.overhead_ms},
        {"overhead_mwh", r.estimate.overhead_mwh}}},
      {"decision", to_json(r.decision)},
      {"response",
       {{"detected_count", r.response.detected_count},
        {"inference_ms", r.response.inference_ms},
        {"energy_mwh", r.response.energy_mwh},
        {"network_ms", r.response.network_ms}}},
      {"gateway_ms", r.gateway_ms},
      {"gateway_mwh", r.gateway_mwh},
      {"request_at_ms", r.request_at_ms},
      {"response_at_ms", r.response_at_ms},
  };
  j["truth_count"] = r.truth_count ? nlohmann::json(*r.truth_count) : nlohmann::json();
  j["credited_map"] = r.credited_map ? nlohmann::json(*r.credited_map) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const MetricsSnapshot& m) {
  return {{"requests", m.requests},
          {"skipped", m.skipped},
          {"dynamic_energy_mwh", m.dynamic_energy_mwh()},
          {"backend_energy_mwh", m.backend_energy_mwh},
          {"gateway_energy_mwh", m.gateway_energy_mwh},
          {"total_latency_s", m.total_latency_s()},
          {"total_latency_ms", m.total_latency_ms},
          {"latency_breakdown_ms",
           {{"gateway", m.gateway_ms}, {"network", m.network_ms}, {"inference", m.inference_ms}}},
          {"modeled_map", m.modeled_map()},
          {"map_sum", m.map_sum},
          {"map_count", m.map_count},
          {"switch_count", m.switch_count},
          {"decisions_by_group", m.decisions_by_group}};
}

nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["header"] = {{"strategy", r.strategy},
                 {"estimator", r.estimator},
                 {"delta_map", r.delta_map},
                 {"workload", r.workload},
                 {"profile_source", r.profile_source},
                 {"rules", r.rules},
                 {"seeds", {{"rnd", r.rnd_seed}, {"fidelity", r.fidelity_seed}}},
                 {"deterministic", r.deterministic}};
  if (!r.config.is_null()) j["header"]["config"] = r.config;
  j["metrics"] = to_json(r.metrics);
  j["idle_baseline_mwh"] = r.idle_baseline_mwh;
  auto log = nlohmann::json::array();
  for (const auto& rec : r.log) log.push_back(to_json(rec));
  j["log"] = std::move(log);
  auto skipped = nlohmann::json::array();
  for (const auto& s : r.skipped) {
    skipped.push_back({{"request_id", s.request_id}, {"item_id", s.item_id}, {"reason", s.reason}});
  }
  j["skipped"] = std::move(skipped);
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& doc) {
  ExperimentReport r;
  try {
    const auto& h = doc.at("header");
    r.strategy = h.at("strategy").get<std::string>();
    r.estimator = h.at("estimator").get<std::string>();
    r.delta_map = h.at("delta_map").get<double>();
    r.workload = h.at("workload").get<std::string>();
    r.profile_source = h.at("profile_source").get<std::string>();
    r.rules = h.value("rules", "");
    r.rnd_seed = h.at("seeds").at("rnd").get<std::uint64_t>();
    r.fidelity_seed = h.at("seeds").at("fidelity").get<std::uint64_t>();
    r.deterministic = h.value("deterministic", false);
    if (h.contains("config")) r.config = h.at("config");
    const auto& m = doc.at("metrics");
    r.metrics.requests = m.at("requests").get<std::uint64_t>();
    r.metrics.skipped = m.at("skipped").get<std::uint64_t>();
    r.metrics.backend_energy_mwh = m.at("backend_energy_mwh").get<double>();
    r.metrics.gateway_energy_mwh = m.at("gateway_energy_mwh").get<double>();
    r.metrics.total_latency_ms = m.at("total_latency_ms").get<double>();
    const auto& lb = m.at("latency_breakdown_ms");
    r.metrics.gateway_ms = lb.at("gateway").get<double>();
    r.metrics.network_ms = lb.at("network").get<double>();
    r.metrics.inference_ms = lb.at("inference").get<double>();
    r.metrics.map_sum = m.at("map_sum").get<double>();
    r.metrics.map_count = m.at("map_count").get<std::uint64_t>();
    r.metrics.switch_count = m.at("switch_count").get<std::uint64_t>();
    r.metrics.decisions_by_group =
        m.at("decisions_by_group").get<std::map<GroupLabel, std::map<std::string, std::uint64_t>>>();
    r.idle_baseline_mwh = doc.value("idle_baseline_mwh", 0.0);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::kMalformedRecord, std::string("not a report: ") + ex.what());
  }
  return r;
}

void write_summary_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  out << kSummaryHeader << '\n';
  for (const auto& r : reports) {
    std::string name = r.strategy;
    // Baselines that were fed a non-default estimator keep it in the name.
    if (r.estimator != "none" && name.rfind("greedy_", 0) != 0 && !(name == "highest_map_group" && r.estimator == "oracle")) {
      name += "+" + r.estimator;
    }
    out << name << ',' << format_double(r.delta_map) << ','
        << format_double(r.metrics.dynamic_energy_mwh()) << ','
        << format_double(r.metrics.total_latency_s()) << ','
        << format_double(r.metrics.modeled_map()) << ','
        << format_double(r.metrics.gateway_energy_mwh) << ','
        << format_double(r.metrics.gateway_ms) << '\n';
  }
}

std::string report_file_name(const ExperimentReport& r) {
  return r.strategy + "_" + r.estimator + "_d" + format_double(r.delta_map) + ".json";
}

void write_report(const std::filesystem::path& path, const ExperimentReport& r) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write report " + path.string());
  out << to_json(r).dump(2) << '\n';
}

}  // namespace edgeroute
