// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Tolerances are fixed here on purpose.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "edgeroute/error.hpp"
#include "edgeroute/estimators.hpp"
#include "edgeroute/harness.hpp"
#include "edgeroute/service.hpp"
#include "oracles.hpp"

using namespace edgeroute;
using Clock = std::chrono::steady_clock;

namespace {

// --- pinned tolerances -----------------------------------------------------
constexpr std::size_t kFuzzTables = 2000;             // at least 1000 required
constexpr double kFuzzBudgetS = 5.0;
constexpr double kOrderingBudgetS = 10.0;
constexpr double kEdBudgetS = 2.0;
constexpr double kEnergyBand = 0.70;                  // ED energy <= 0.70 x HMG
constexpr double kMapBand = 0.95;                     // ED mAP >= 0.95 x HMG
constexpr double kTrendDelta = 5.0;
constexpr std::uint64_t kMaxObSwitches = 5;
constexpr double kAccountingRelTol = 1e-12;
constexpr double kBoundSlack = 1e-9;                  // float rounding only; the OB bound is tight at d=0
constexpr std::size_t kParityRequests = 100;
const std::vector<double> kSweepDeltas = {0, 5, 10, 15, 20, 25};

const GroupRules kRules = GroupRules::defaults();

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.precision(prec);
  s << std::fixed << v;
  return s.str();
}

struct Result {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Result> g_results;

void report(int id, std::string name, bool pass, std::string detail) {
  std::printf("%s %2d %-26s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  g_results.push_back({id, std::move(name), pass, std::move(detail)});
}

// --- criterion 2: shared feasibility audit -----------------------------------
struct FeasibilityAudit {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;

  void check(const ProfileTable& table, const RoutingDecision& d, double delta) {
    const auto* chosen = table.find(d.pair, d.entry_group);
    double best = -1;
    for (const auto& e : table.entries()) {
      if (e.group == d.entry_group) best = std::max(best, e.map);
    }
    ++checked;
    if (!chosen || d.map_max != best || chosen->map < best - delta) ++violations;
  }
};
FeasibilityAudit g_feasibility;

bool audited(Strategy s) { return is_greedy(s) || s == Strategy::kHighestMapGroup; }

// --- criterion 9: shared accounting audit ------------------------------------
struct AccountingAudit {
  std::uint64_t reports = 0;
  std::uint64_t violations = 0;
  double worst_rel = 0;

  void close(double got, double want) {
    const double scale = std::max({std::abs(got), std::abs(want), 1e-300});
    const double rel = std::abs(got - want) / scale;
    worst_rel = std::max(worst_rel, got == want ? 0.0 : rel);
    if (rel >= kAccountingRelTol) ++violations;
  }

  void check(const ExperimentReport& r, std::span<const DeviceIdlePower> idle) {
    ++reports;
    double backend = 0, gateway = 0, latency = 0, gw_ms = 0, net_ms = 0, inf_ms = 0, map = 0;
    std::uint64_t mapped = 0;
    for (const auto& rec : r.log) {
      backend += rec.response.energy_mwh;
      gateway += rec.gateway_mwh;
      latency += rec.latency_ms();
      gw_ms += rec.gateway_ms;
      net_ms += rec.response.network_ms;
      inf_ms += rec.response.inference_ms;
      if (rec.credited_map) {
        map += *rec.credited_map;
        ++mapped;
      }
    }
    const auto& m = r.metrics;
    if (m.requests != r.log.size() || m.skipped != r.skipped.size() || m.map_count != mapped) {
      ++violations;
    }
    close(m.backend_energy_mwh, backend);
    close(m.gateway_energy_mwh, gateway);
    close(m.dynamic_energy_mwh(), backend + gateway);
    close(m.total_latency_ms, latency);
    close(m.gateway_ms, gw_ms);
    close(m.network_ms, net_ms);
    close(m.inference_ms, inf_ms);
    close(m.map_sum, map);
    // Idle energy is reported on its own and never folded into dynamic energy.
    close(r.idle_baseline_mwh, idle_baseline(m.total_latency_s(), idle));
    const auto doc = to_json(r);
    close(doc.at("metrics").at("dynamic_energy_mwh").get<double>(), backend + gateway);
  }
};
AccountingAudit g_accounting;

const std::vector<DeviceIdlePower> kIdle = {
    {"pi5", 2.7}, {"pi5_tpu", 3.1}, {"pi5_ai_hat", 3.3}, {"jetson_orin_nano", 4.2}};

ExperimentReport audited_replay(const WorkloadManifest& w, Strategy s, EstimatorKind e,
                                const ReplayConfig& cfg) {
  auto r = replay(w, s, e, cfg);
  for (const auto& rec : r.log) {
    if (audited(s)) {
      g_feasibility.check(*cfg.table, rec.decision,
                          s == Strategy::kHighestMapGroup ? 0.0 : cfg.routing.delta_map);
    }
  }
  g_accounting.check(r, cfg.idle_powers);
  return r;
}

ReplayConfig base_config(double delta) {
  ReplayConfig cfg;
  cfg.table = std::make_shared<const ProfileTable>(seed_profile());
  cfg.routing.delta_map = delta;
  cfg.routing.rnd_seed = 2024;
  cfg.deterministic = true;
  cfg.idle_powers = kIdle;
  cfg.estimators.detector_command = {EDGEROUTE_STUB_DETECTOR};
  return cfg;
}

// --- 1 ---------------------------------------------------------------------
void greedy_optimality() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> delta_d(0.0, 30.0);
  std::uniform_int_distribution<std::uint64_t> count_d(0, 12);
  std::size_t mismatches = 0, compared = 0, empty = 0;
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < kFuzzTables; ++i) {
    testkit::RandomTableOptions opts;
    opts.coarse = i % 2 == 0;  // ties are frequent on the coarse grid
    const auto table = testkit::random_table(rng, opts);
    // Mostly query groups the table has; the rest exercise the empty-group path.
    std::vector<std::uint64_t> present;
    for (const auto& rule : kRules.rules()) {
      for (const auto& e : table.entries()) {
        if (e.group == rule.label) {
          present.push_back(rule.lo);
          break;
        }
      }
    }
    for (int q = 0; q < 8; ++q) {
      auto count = count_d(rng);
      if (q != 7 && !present.empty()) {
        count = present[rng() % present.size()];
        if (count == kRules.rules().back().lo) count += rng() % 9;
      }
      double delta = delta_d(rng);
      if (q % 4 == 0) delta = std::floor(delta);
      RoutingConfig cfg;
      cfg.delta_map = delta;
      const auto want = testkit::route_reference_bruteforce(table.entries(), kRules.group_of(count), delta);
      try {
        const auto got = route_greedy(table, count, cfg);
        ++compared;
        g_feasibility.check(table, got, delta);
        if (!want || got.pair != want->pair()) ++mismatches;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kEmptyGroup || want) ++mismatches;
        ++empty;
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, "greedy-optimality", mismatches == 0 && secs < kFuzzBudgetS,
         std::to_string(kFuzzTables) + " tables, " + std::to_string(compared) + " routed + " +
             std::to_string(empty) + " empty-group queries, " + std::to_string(mismatches) +
             " mismatches, " + fmt(secs) + " s (< " + fmt(kFuzzBudgetS, 1) + " s)");
}

// --- 3 ---------------------------------------------------------------------
void table_reproduction() {
  const auto table = seed_profile();
  std::vector<std::string> bad;
  BaselineState st;
  const RoutingConfig cfg;
  auto expect = [&](const std::string& what, const PairId& got, const PairId& want) {
    if (got != want) bad.push_back(what + " got " + got.to_string() + " want " + want.to_string());
  };
  expect("LE", route_baseline(Strategy::kLowestEnergy, table, 0, cfg, st).pair,
         {"ssd_v1", "jetson_orin_nano"});
  expect("LI", route_baseline(Strategy::kLowestInference, table, 0, cfg, st).pair, {"ssd_v1", "pi5"});
  const std::map<std::uint64_t, PairId> map_rows = {
      {0, {"ssd_v1", "pi5_tpu"}},
      {1, {"ssd_lite", "pi5"}},
      {2, {"yolov8_small", "jetson_orin_nano"}},
      {3, {"yolov8_small", "pi5_ai_hat"}},
      {4, {"yolov8_small", "pi5_ai_hat"}},
  };
  for (const auto& [count, want] : map_rows) {
    const auto label = kRules.group_of(count);
    const auto hmg = route_baseline(Strategy::kHighestMapGroup, table, count, cfg, st);
    expect("HMG " + label, hmg.pair, want);
    const auto oracle = route_greedy(table, count, cfg);
    expect("oracle d=0 " + label, oracle.pair, hmg.pair);
  }
  std::string detail = "LE, LI, 5 HMG group rows, oracle(d=0)==HMG";
  for (const auto& b : bad) detail += "; " + b;
  report(3, "table-reproduction", bad.empty(), detail);
}

// --- 4 ---------------------------------------------------------------------
void delta_sweep(const WorkloadManifest& w) {
  auto cfg = base_config(0);
  const auto hmg = audited_replay(w, Strategy::kHighestMapGroup, EstimatorKind::kOracle, cfg);
  std::size_t violations = 0;
  double prev = std::numeric_limits<double>::infinity();
  std::string trail;
  for (double delta : kSweepDeltas) {
    cfg.routing.delta_map = delta;
    const auto r = audited_replay(w, Strategy::kGreedyOracle, EstimatorKind::kOracle, cfg);
    const double e = r.metrics.dynamic_energy_mwh();
    if (e > prev) ++violations;
    if (r.metrics.modeled_map() < hmg.metrics.modeled_map() - delta) ++violations;
    prev = e;
    trail += " d" + fmt(delta, 0) + ":" + fmt(e, 1) + "mWh/" + fmt(r.metrics.modeled_map(), 2);
  }
  report(4, "delta-sweep", violations == 0,
         std::to_string(violations) + " violations; HMG mAP " + fmt(hmg.metrics.modeled_map(), 2) +
             ";" + trail);
}

// --- 5 and 6 ---------------------------------------------------------------
void ordering_and_trend(const WorkloadManifest& w) {
  const std::vector<StrategySpec> specs = {
      {Strategy::kGreedyOracle, EstimatorKind::kOracle}, {Strategy::kGreedyEd, EstimatorKind::kEd},
      {Strategy::kGreedySf, EstimatorKind::kSf},         {Strategy::kGreedyOb, EstimatorKind::kOb},
      {Strategy::kRoundRobin, EstimatorKind::kNone},     {Strategy::kRandom, EstimatorKind::kNone},
      {Strategy::kLowestEnergy, EstimatorKind::kNone},   {Strategy::kLowestInference, EstimatorKind::kNone},
      {Strategy::kHighestMap, EstimatorKind::kNone},     {Strategy::kHighestMapGroup, EstimatorKind::kOracle},
  };
  const auto cfg = base_config(kTrendDelta);
  std::map<Strategy, MetricsSnapshot> m;
  const auto t0 = Clock::now();
  for (const auto& s : specs) m[s.strategy] = audited_replay(w, s.strategy, s.estimator, cfg).metrics;
  const double secs = seconds_since(t0);

  std::vector<std::string> bad;
  for (const auto& [s, x] : m) {
    if (x.requests != w.items.size()) bad.push_back(std::string(to_string(s)) + " skipped requests");
    if (m[Strategy::kLowestEnergy].dynamic_energy_mwh() > x.dynamic_energy_mwh()) {
      bad.push_back("LE energy above " + std::string(to_string(s)));
    }
    if (m[Strategy::kHighestMapGroup].modeled_map() < x.modeled_map()) {
      bad.push_back("HMG mAP below " + std::string(to_string(s)));
    }
    if (m[Strategy::kLowestInference].total_latency_ms > x.total_latency_ms) {
      bad.push_back("LI latency above " + std::string(to_string(s)));
    }
  }
  std::string detail = std::to_string(specs.size()) + " strategies x " + std::to_string(w.items.size()) +
                       " items, " + fmt(secs) + " s (< " + fmt(kOrderingBudgetS, 1) + " s)";
  detail += "; LE " + fmt(m[Strategy::kLowestEnergy].dynamic_energy_mwh(), 1) + " mWh, LI " +
            fmt(m[Strategy::kLowestInference].total_latency_s(), 2) + " s, HMG mAP " +
            fmt(m[Strategy::kHighestMapGroup].modeled_map(), 2);
  for (const auto& b : bad) detail += "; " + b;
  report(5, "router-ordering", bad.empty() && secs < kOrderingBudgetS, detail);

  const auto& ed = m[Strategy::kGreedyEd];
  const auto& hmg = m[Strategy::kHighestMapGroup];
  const double e_ratio = ed.dynamic_energy_mwh() / hmg.dynamic_energy_mwh();
  const double m_ratio = ed.modeled_map() / hmg.modeled_map();
  const double l_ratio = ed.total_latency_ms / hmg.total_latency_ms;
  report(6, "energy-trend-band", e_ratio <= kEnergyBand && m_ratio >= kMapBand,
         "greedy-ED d=5 vs HMG: energy x" + fmt(e_ratio) + " (<= " + fmt(kEnergyBand, 2) +
             "), mAP x" + fmt(m_ratio) + " (>= " + fmt(kMapBand, 2) + "), latency x" + fmt(l_ratio));
}

// --- 7 ---------------------------------------------------------------------
void ob_state_machine(const WorkloadManifest& source) {
  const auto w = build_balanced_sorted(source, kRules, 200, 11);
  const auto table = seed_profile();
  std::vector<std::string> bad;
  std::string detail;
  for (double delta : {0.0, 5.0, 10.0}) {
    const auto cfg = base_config(delta);
    const auto ob = audited_replay(w, Strategy::kGreedyOb, EstimatorKind::kOb, cfg);
    const auto hmg = audited_replay(w, Strategy::kHighestMapGroup, EstimatorKind::kOracle, cfg);

    // One stale decision per group boundary: the first item of group k is
    // routed with group k-1's pair.
    RoutingConfig rc;
    rc.delta_map = delta;
    double penalty = 0;
    const auto& rules = kRules.rules();
    for (std::size_t k = 1; k < rules.size(); ++k) {
      const auto prev = route_greedy(table, rules[k - 1].lo, rc).pair;
      const auto* cell = table.find(prev, rules[k].label);
      const double map_max = route_greedy(table, rules[k].lo, rc).map_max;
      penalty += std::max(0.0, map_max - delta - (cell ? cell->map : 0.0));
    }
    penalty /= static_cast<double>(w.items.size());
    const double bound = hmg.metrics.modeled_map() - delta - penalty;
    if (ob.metrics.switch_count > kMaxObSwitches) {
      bad.push_back("d" + fmt(delta, 0) + " switches " + std::to_string(ob.metrics.switch_count));
    }
    if (ob.metrics.modeled_map() < bound - kBoundSlack) bad.push_back("d" + fmt(delta, 0) + " mAP below bound");
    detail += " d" + fmt(delta, 0) + ": switches " + std::to_string(ob.metrics.switch_count) + ", mAP " +
              fmt(ob.metrics.modeled_map(), 3) + " >= " + fmt(bound, 3) + ";";
  }
  for (const auto& b : bad) detail += " " + b + ";";
  report(7, "ob-state-machine", bad.empty(), std::to_string(w.items.size()) + " sorted items;" + detail);
}

// --- 8 ---------------------------------------------------------------------
void ed_exactness() {
  constexpr int kSize = 256;
  const EdParams params;
  const double gate = params.min_area_fraction * kSize * kSize;
  const auto min_area = static_cast<std::size_t>(std::ceil(2.0 * gate));
  std::mt19937_64 rng(8);
  std::vector<ImageRaster> images;
  for (std::uint64_t k = 0; k <= 6; ++k) images.push_back(render_rectangles(kSize, k, min_area, rng));
  std::string got;
  std::size_t wrong = 0;
  const auto t0 = Clock::now();
  for (std::uint64_t k = 0; k <= 6; ++k) {
    const auto n = estimate_count_ed(images[k], params, 5.0).count;
    got += (k ? "," : "") + std::to_string(n);
    if (n != k) ++wrong;
  }
  const double secs = seconds_since(t0);
  report(8, "ed-exactness", wrong == 0 && secs < kEdBudgetS,
         "k=0..6 at 256x256 -> [" + got + "], " + fmt(secs) + " s (< " + fmt(kEdBudgetS, 1) + " s)");
}

// --- 10 --------------------------------------------------------------------
void service_parity(const WorkloadManifest& source) {
  WorkloadManifest w = source;
  w.items.resize(std::min(kParityRequests, w.items.size()));
  w.name = "parity";
  std::size_t diffs = 0, sent = 0;
  std::string detail;
  for (const char* est : {"ed", "ob"}) {
    AppConfig app;
    app.strategy = "greedy";
    app.estimator = est;
    app.routing.delta_map = kTrendDelta;
    app.deterministic = true;
    auto rc = base_config(kTrendDelta);
    const auto strategy = app.resolved_strategy();
    const auto offline = audited_replay(w, strategy, app.resolved_estimator(), rc);

    GatewayService svc(app);
    const int port = svc.bind("127.0.0.1", 0);
    std::thread server([&] { svc.run(); });
    httplib::Client client("127.0.0.1", port);
    for (int i = 0; i < 400 && !client.Get("/healthz"); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    for (std::size_t i = 0; i < w.items.size(); ++i) {
      const nlohmann::json body{{"image", w.items[i].image},
                                {"truth_count", w.items[i].truth_count},
                                {"stream_id", "parity"}};
      auto res = client.Post("/infer", body.dump(), "application/json");
      ++sent;
      if (!res || res->status != 200 || i >= offline.log.size()) {
        ++diffs;
        continue;
      }
      const auto live = nlohmann::json::parse(res->body).at("decision").dump();
      if (live != to_json(offline.log[i].decision).dump()) ++diffs;
    }
    svc.stop();
    server.join();
    detail += std::string(" greedy-") + est + " " + std::to_string(w.items.size()) + " requests;";
  }
  report(10, "service-parity", diffs == 0,
         std::to_string(sent) + " POSTs," + detail + " " + std::to_string(diffs) + " decision diffs");
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const auto dir = testkit::scratch_dir("acceptance");
  SyntheticOptions opts;
  opts.items = 1000;
  opts.seed = 7;
  const auto workload = generate_synthetic_workload(dir / "synthetic", opts, kRules);

  try {
    greedy_optimality();
    table_reproduction();
    delta_sweep(workload);
    ordering_and_trend(workload);
    ob_state_machine(workload);
    ed_exactness();
    service_parity(workload);
  } catch (const std::exception& ex) {
    std::printf("FAIL    aborted: %s\n", ex.what());
    return 1;
  }
  report(2, "feasibility-invariant", g_feasibility.violations == 0 && g_feasibility.checked > 0,
         std::to_string(g_feasibility.checked) + " greedy/HMG decisions, " +
             std::to_string(g_feasibility.violations) + " violations");
  report(9, "accounting-identities", g_accounting.violations == 0 && g_accounting.reports > 0,
         std::to_string(g_accounting.reports) + " replays, " + std::to_string(g_accounting.violations) +
             " violations, worst relative error " + fmt(g_accounting.worst_rel, 17) + " (< 1e-12)");

  std::size_t failed = 0;
  for (const auto& r : g_results) failed += r.pass ? 0 : 1;
  std::printf("%zu/%zu criteria passed in %.2f s\n", g_results.size() - failed, g_results.size(),
              seconds_since(t0));
  return failed == 0 ? 0 : 1;
}
