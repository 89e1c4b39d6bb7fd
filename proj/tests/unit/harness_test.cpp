#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "edgeroute/error.hpp"
#include "edgeroute/harness.hpp"
#include "oracles.hpp"

using namespace edgeroute;

namespace {

const GroupRules kRules = GroupRules::defaults();

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::kInvalidArgument;
}

WorkloadManifest counts_workload(const std::vector<std::uint64_t>& counts, std::string name = "w") {
  WorkloadManifest m;
  m.name = std::move(name);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    m.items.push_back({"i" + std::to_string(i), "unused.pgm", counts[i], kRules.group_of(counts[i])});
  }
  return m;
}

ReplayConfig seed_config(double delta = 0.0) {
  ReplayConfig cfg;
  cfg.table = std::make_shared<const ProfileTable>(seed_profile());
  cfg.routing.delta_map = delta;
  cfg.routing.rnd_seed = 17;
  cfg.deterministic = true;
  return cfg;
}

std::vector<std::uint64_t> mixed_counts(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> d(0, 12);
  std::vector<std::uint64_t> out(n);
  for (auto& c : out) c = d(rng);
  return out;
}

}  // namespace

TEST(Replay, EmptyWorkloadIsAllZero) {
  auto cfg = seed_config();
  cfg.idle_powers = {{"pi5", 3.0}};
  const auto r = replay(counts_workload({}), Strategy::kGreedyOracle, EstimatorKind::kOracle, cfg);
  EXPECT_EQ(r.metrics.requests, 0u);
  EXPECT_EQ(r.metrics.skipped, 0u);
  EXPECT_EQ(r.metrics.dynamic_energy_mwh(), 0.0);
  EXPECT_EQ(r.metrics.total_latency_ms, 0.0);
  EXPECT_EQ(r.metrics.modeled_map(), 0.0);
  EXPECT_EQ(r.metrics.switch_count, 0u);
  EXPECT_EQ(r.idle_baseline_mwh, 0.0);
  EXPECT_TRUE(r.log.empty());
}

TEST(Replay, OracleAtZeroDeltaMatchesHighestMapGroup) {
  const auto w = counts_workload(mixed_counts(300, 4));
  const auto cfg = seed_config(0);
  const auto a = replay(w, Strategy::kGreedyOracle, EstimatorKind::kOracle, cfg);
  const auto b = replay(w, Strategy::kHighestMapGroup, EstimatorKind::kOracle, cfg);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].decision.pair, b.log[i].decision.pair) << i;
  }
  EXPECT_DOUBLE_EQ(a.metrics.modeled_map(), b.metrics.modeled_map());
  EXPECT_DOUBLE_EQ(a.metrics.backend_energy_mwh, b.metrics.backend_energy_mwh);
}

TEST(Replay, OutputBasedLagsByOneRequest) {
  const auto cfg = seed_config(0);
  const auto r = replay(counts_workload({0, 0, 1, 1}), Strategy::kGreedyOb, EstimatorKind::kOb, cfg);
  ASSERT_EQ(r.log.size(), 4u);
  std::vector<std::uint64_t> est;
  for (const auto& rec : r.log) est.push_back(rec.estimate.count);
  EXPECT_EQ(est, (std::vector<std::uint64_t>{0, 0, 0, 1}));
  EXPECT_LE(r.metrics.switch_count, 2u);
  EXPECT_EQ(r.metrics.switch_count, 1u);
  // The third request was routed for G1 but is credited on its true group.
  const auto& third = r.log[2];
  EXPECT_EQ(third.decision.group, "G1");
  EXPECT_EQ(third.true_group, "G2");
  EXPECT_EQ(*third.credited_map, cfg.table->find(third.decision.pair, "G2")->map);
}

TEST(ModeledAccuracy, MeanOfCreditedCells) {
  const auto table = seed_profile();
  RequestRecord a, b;
  a.true_group = "G1";
  a.decision.pair = {"ssd_v1", "pi5_tpu"};
  b.true_group = "G5";
  b.decision.pair = {"yolov8_small", "pi5_ai_hat"};
  const std::vector<RequestRecord> log{a, b};
  const double want = (table.find(a.decision.pair, "G1")->map + table.find(b.decision.pair, "G5")->map) / 2;
  EXPECT_DOUBLE_EQ(modeled_accuracy(log, table), want);
  EXPECT_EQ(modeled_accuracy(std::span<const RequestRecord>{}, table), 0.0);

  RequestRecord no_truth = a;
  no_truth.true_group.clear();
  EXPECT_EQ(kind_of([&] { modeled_accuracy(std::vector{no_truth}, table); }),
            ErrorKind::kMissingGroundTruth);
  RequestRecord unknown = a;
  unknown.decision.pair = {"ghost", "pi5"};
  EXPECT_EQ(kind_of([&] { modeled_accuracy(std::vector{unknown}, table); }),
            ErrorKind::kMissingProfileCell);
}

TEST(Replay, MissingProfileCellAborts) {
  // LE picks a pair that was never profiled on G5.
  ProfileTable t({{"cheap", "d", "fw", "G1", 10, 5, 0.1}, {"big", "d", "fw", "G1", 50, 50, 1.0},
                  {"big", "d", "fw", "G5", 40, 50, 1.0}},
                 "partial");
  ReplayConfig cfg = seed_config();
  cfg.table = std::make_shared<const ProfileTable>(t);
  EXPECT_EQ(kind_of([&] {
              replay(counts_workload({0, 7}), Strategy::kLowestEnergy, EstimatorKind::kNone, cfg);
            }),
            ErrorKind::kMissingProfileCell);
}

TEST(Accounting, IdentitiesHold) {
  auto cfg = seed_config(5);
  cfg.backend.network_ms = 4;
  cfg.idle_powers = {{"pi5", 3.0}, {"jetson_orin_nano", 5.0}};
  const auto w = counts_workload(mixed_counts(400, 9));
  for (auto s : {Strategy::kGreedyEd, Strategy::kGreedyOb, Strategy::kRoundRobin, Strategy::kRandom}) {
    // ED on fake images is skipped entirely, so use the oracle for the greedy row.
    const auto est = s == Strategy::kGreedyEd ? EstimatorKind::kOracle : default_estimator(s);
    const auto r = replay(w, s, est, cfg);
    double backend = 0, gateway = 0, latency = 0, map = 0;
    for (const auto& rec : r.log) {
      backend += rec.response.energy_mwh;
      gateway += rec.gateway_mwh;
      latency += rec.latency_ms();
      map += *rec.credited_map;
      EXPECT_DOUBLE_EQ(rec.latency_ms(), rec.gateway_ms + 4 + rec.response.inference_ms);
    }
    const auto& m = r.metrics;
    EXPECT_EQ(m.requests, w.items.size());
    EXPECT_NEAR(m.backend_energy_mwh, backend, 1e-9);
    EXPECT_NEAR(m.gateway_energy_mwh, gateway, 1e-9);
    EXPECT_NEAR(m.dynamic_energy_mwh(), backend + gateway, 1e-9);
    EXPECT_NEAR(m.total_latency_ms, latency, 1e-6);
    EXPECT_NEAR(m.total_latency_ms, m.gateway_ms + m.network_ms + m.inference_ms, 1e-6);
    EXPECT_NEAR(m.modeled_map(), map / static_cast<double>(w.items.size()), 1e-9);
    EXPECT_NEAR(m.modeled_map(), modeled_accuracy(r.log, *cfg.table), 1e-9);
    EXPECT_NEAR(r.idle_baseline_mwh, 8.0 * m.total_latency_s() / 3.6, 1e-9);
    std::uint64_t decided = 0;
    for (const auto& [g, pairs] : m.decisions_by_group) {
      for (const auto& [p, n] : pairs) decided += n;
    }
    EXPECT_EQ(decided, m.requests);
  }
}

TEST(Replay, ClosedLoopTimestamps) {
  auto cfg = seed_config(5);
  cfg.backend.network_ms = 2.5;
  const auto r = replay(counts_workload(mixed_counts(200, 2)), Strategy::kGreedyOracle,
                        EstimatorKind::kOracle, cfg);
  ASSERT_EQ(r.log.size(), 200u);
  EXPECT_EQ(r.log.front().request_at_ms, 0.0);
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    EXPECT_LT(r.log[i].request_at_ms, r.log[i].response_at_ms);
    EXPECT_EQ(r.log[i].request_id, i + 1);
    if (i + 1 < r.log.size()) EXPECT_LE(r.log[i].response_at_ms, r.log[i + 1].request_at_ms);
  }
  EXPECT_NEAR(r.log.back().response_at_ms, r.metrics.total_latency_ms, 1e-6);
}

TEST(Replay, EstimatorFaultsSkipRequests) {
  // ED cannot read these images, so every request is skipped and counted.
  const auto r = replay(counts_workload({1, 2, 3}), Strategy::kGreedyEd, EstimatorKind::kEd,
                        seed_config());
  EXPECT_EQ(r.metrics.requests, 0u);
  EXPECT_EQ(r.metrics.skipped, 3u);
  ASSERT_EQ(r.skipped.size(), 3u);
  EXPECT_EQ(r.skipped[1].item_id, "i1");
  EXPECT_EQ(r.skipped[1].request_id, 2u);
}

TEST(Replay, EdgeDetectionOnSyntheticImages) {
  SyntheticOptions opts;
  opts.items = 60;
  opts.seed = 3;
  const auto w = generate_synthetic_workload(testkit::scratch_dir("harness_ed"), opts, kRules);
  const auto cfg = seed_config(5);
  const auto ed = replay(w, Strategy::kGreedyEd, EstimatorKind::kEd, cfg);
  const auto oracle = replay(w, Strategy::kGreedyOracle, EstimatorKind::kOracle, cfg);
  EXPECT_EQ(ed.metrics.requests, 60u);
  for (std::size_t i = 0; i < ed.log.size(); ++i) {
    EXPECT_EQ(ed.log[i].estimate.count, w.items[i].truth_count) << w.items[i].image;
    EXPECT_EQ(ed.log[i].decision.pair, oracle.log[i].decision.pair);
    EXPECT_DOUBLE_EQ(ed.log[i].gateway_ms, 2.0);
  }
}

TEST(Sweep, EnergyNonIncreasingInDelta) {
  const auto w = counts_workload(mixed_counts(500, 12));
  const std::vector<double> deltas{0, 5, 10, 15, 20, 25};
  const auto reports = sweep_delta(w, {{Strategy::kGreedyOracle, EstimatorKind::kOracle}}, deltas,
                                   seed_config());
  ASSERT_EQ(reports.size(), deltas.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    EXPECT_EQ(reports[i].delta_map, deltas[i]);
    if (i == 0) continue;
    EXPECT_LE(reports[i].metrics.backend_energy_mwh, reports[i - 1].metrics.backend_energy_mwh + 1e-9);
    EXPECT_GE(reports[i].metrics.modeled_map(), reports[0].metrics.modeled_map() - deltas[i] - 1e-9);
  }
  EXPECT_EQ(kind_of([&] {
              sweep_delta(w, {{Strategy::kGreedyOracle, EstimatorKind::kOracle}}, {5, -1}, seed_config());
            }),
            ErrorKind::kInvalidArgument);
}

TEST(Report, JsonRoundTripOfHeaderAndMetrics) {
  auto cfg = seed_config(10);
  cfg.backend.fidelity.seed = 99;
  auto r = replay(counts_workload(mixed_counts(50, 1), "mix"), Strategy::kRandom, EstimatorKind::kNone, cfg);
  r.config = {{"note", "frozen"}};
  const auto doc = to_json(r);
  EXPECT_EQ(doc.at("header").at("config").at("note"), "frozen");
  EXPECT_EQ(doc.at("log").size(), 50u);
  const auto back = report_from_json(nlohmann::json::parse(doc.dump()));
  EXPECT_EQ(back.strategy, "random");
  EXPECT_EQ(back.estimator, "none");
  EXPECT_EQ(back.delta_map, 10.0);
  EXPECT_EQ(back.workload, "mix");
  EXPECT_EQ(back.rnd_seed, 17u);
  EXPECT_EQ(back.fidelity_seed, 99u);
  EXPECT_TRUE(back.deterministic);
  EXPECT_EQ(back.metrics.requests, r.metrics.requests);
  EXPECT_DOUBLE_EQ(back.metrics.backend_energy_mwh, r.metrics.backend_energy_mwh);
  EXPECT_DOUBLE_EQ(back.metrics.modeled_map(), r.metrics.modeled_map());
  EXPECT_EQ(back.metrics.switch_count, r.metrics.switch_count);
  EXPECT_EQ(back.metrics.decisions_by_group, r.metrics.decisions_by_group);
  EXPECT_EQ(kind_of([] { report_from_json(nlohmann::json::parse(R"({"header": 3})")); }),
            ErrorKind::kMalformedRecord);
}

TEST(Report, DeterministicRunsAreByteIdentical) {
  const auto w = counts_workload(mixed_counts(300, 5));
  auto cfg = seed_config(5);
  cfg.backend.fidelity = {Fidelity::Kind::kMissRate, 0.2, 8};
  for (auto s : {Strategy::kGreedyOb, Strategy::kRandom}) {
    const auto a = to_json(replay(w, s, default_estimator(s), cfg)).dump(2);
    const auto b = to_json(replay(w, s, default_estimator(s), cfg)).dump(2);
    EXPECT_EQ(a, b);
  }
}

TEST(Report, SummaryCsvAndFileNames) {
  const auto w = counts_workload(mixed_counts(20, 6));
  const auto reports = sweep_delta(
      w, {{Strategy::kGreedyOracle, EstimatorKind::kOracle}, {Strategy::kLowestEnergy, EstimatorKind::kNone}},
      {0, 5}, seed_config());
  std::ostringstream out;
  write_summary_csv(out, reports);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kSummaryHeader);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].substr(0, rows[0].find(',')), "greedy_oracle");
  EXPECT_EQ(rows[3].substr(0, rows[3].find(',')), "lowest_energy");
  EXPECT_EQ(report_file_name(reports[1]), "greedy_oracle_oracle_d5.json");

  const auto dir = testkit::scratch_dir("report_write");
  write_report(dir / "r.json", reports[0]);
  std::ifstream f(dir / "r.json");
  const auto doc = nlohmann::json::parse(f);
  EXPECT_EQ(doc.at("header").at("strategy"), "greedy_oracle");
}
