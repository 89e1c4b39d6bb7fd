#include "edgeroute/cli.hpp"

#include <CLI11.hpp>
#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "edgeroute/config.hpp"
#include "edgeroute/error.hpp"
#include "edgeroute/format.hpp"
#include "edgeroute/harness.hpp"
#include "edgeroute/service.hpp"
#include "edgeroute/workload.hpp"

namespace edgeroute {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Flags shared by the commands that build an AppConfig. Each value only
/// overrides the config when its flag was given.
struct ConfigFlags {
  std::string config, profile, rules, strategy, estimator, workload, out, backend_mode;
  std::string detector_cmd, detector_address, fallback;
  double delta = 0, network_ms = 0, miss_rate = 0, gateway_power = 0;
  std::uint64_t seed = 0, fidelity_seed = 0;
  bool deterministic = false, realtime = false;
  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app) {
    opts["config"] = app->add_option("--config", config, "JSON config file");
    opts["profile"] = app->add_option("--profile", profile, "profile table (CSV or JSON)");
    opts["rules"] = app->add_option("--rules", rules, "group rules, e.g. 0:G1,1:G2,2:G3,3:G4,4+:G5");
    opts["strategy"] = app->add_option("--strategy", strategy, "routing strategy");
    opts["estimator"] = app->add_option("--estimator", estimator, "none|oracle|ed|sf|ob");
    opts["delta"] = app->add_option("--delta", delta, "delta-mAP tolerance in points");
    opts["workload"] = app->add_option("--workload", workload, "workload manifest (JSONL)");
    opts["seed"] = app->add_option("--seed", seed, "seed of the random baseline");
    opts["fidelity_seed"] = app->add_option("--fidelity-seed", fidelity_seed, "backend miss-rate seed");
    opts["deterministic"] = app->add_flag("--deterministic", deterministic,
                                          "fixed estimator overheads instead of wall time");
    opts["out"] = app->add_option("--out", out, "output directory");
    opts["backend_mode"] = app->add_option("--backend-mode", backend_mode, "simulate|http");
    opts["realtime"] = app->add_flag("--realtime", realtime, "sleep for simulated latencies");
    opts["network_ms"] = app->add_option("--network-ms", network_ms, "per-request network latency");
    opts["miss_rate"] = app->add_option("--miss-rate", miss_rate, "simulated per-object miss rate");
    opts["gateway_power"] = app->add_option("--gateway-power", gateway_power, "gateway watts");
    opts["detector_cmd"] = app->add_option("--detector-cmd", detector_cmd, "front-end detector command");
    opts["detector_address"] = app->add_option("--detector-address", detector_address,
                                               "front-end detector host:port");
    opts["fallback"] = app->add_option("--fallback", fallback, "error|global_table");
  }

  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }

  AppConfig build() const {
    AppConfig cfg;
    if (given("config")) cfg = load_config_file(config);
    apply_env(cfg);
    if (given("profile")) cfg.profile_path = profile;
    if (given("rules")) cfg.routing.rules = GroupRules::parse(rules);
    if (given("strategy")) cfg.strategy = strategy;
    if (given("estimator")) cfg.estimator = estimator;
    if (given("delta")) cfg.routing.delta_map = delta;
    if (given("workload")) cfg.workload_path = workload;
    if (given("seed")) cfg.routing.rnd_seed = seed;
    if (given("fidelity_seed")) cfg.backend.fidelity.seed = fidelity_seed;
    if (given("deterministic")) cfg.deterministic = deterministic;
    if (given("out")) cfg.out_dir = out;
    if (given("backend_mode")) cfg.backend.mode = parse_backend_mode(backend_mode);
    if (given("realtime")) cfg.backend.realtime = realtime;
    if (given("network_ms")) cfg.backend.network_ms = network_ms;
    if (given("miss_rate")) {
      cfg.backend.fidelity.kind = Fidelity::Kind::kMissRate;
      cfg.backend.fidelity.miss_rate = miss_rate;
    }
    if (given("gateway_power")) cfg.estimators.gateway_power_w = gateway_power;
    if (given("detector_cmd")) {
      std::istringstream in(detector_cmd);
      cfg.estimators.detector_command.clear();
      for (std::string w; in >> w;) cfg.estimators.detector_command.push_back(w);
    }
    if (given("detector_address")) cfg.estimators.detector_address = detector_address;
    if (given("fallback")) cfg.routing.fallback = parse_fallback(fallback);
    // sweep accepts a comma list of strategies; check each one.
    const auto names = split_list(cfg.strategy);
    if (names.size() <= 1) cfg.validate();
    for (std::size_t i = 0; names.size() > 1 && i < names.size(); ++i) {
      AppConfig one = cfg;
      one.strategy = names[i];
      one.validate();
    }
    return cfg;
  }
};

ReplayConfig replay_config(const AppConfig& cfg) {
  ReplayConfig rc;
  rc.table = load_configured_profile(cfg);
  rc.routing = cfg.routing;
  rc.estimators = cfg.estimators;
  rc.backend = cfg.backend;
  rc.idle_powers = cfg.idle_powers;
  rc.deterministic = cfg.deterministic;
  return rc;
}

WorkloadManifest configured_workload(const AppConfig& cfg) {
  if (cfg.workload_path.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "--workload is required");
  }
  return import_manifest_file(cfg.workload_path, cfg.routing.rules);
}

fs::path write_report_to(const AppConfig& cfg, ExperimentReport& report) {
  fs::create_directories(cfg.out_dir);
  report.config = config_to_json(cfg);
  report.config["strategy"] = report.strategy;
  report.config["estimator"] = report.estimator;
  report.config["delta_map"] = report.delta_map;
  const fs::path path = fs::path(cfg.out_dir) / report_file_name(report);
  write_report(path, report);
  return path;
}

void print_summary_line(std::ostream& out, const ExperimentReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "energy %.3f mWh, latency %.3f s, modeled mAP %.3f",
                r.metrics.dynamic_energy_mwh(), r.metrics.total_latency_s(), r.metrics.modeled_map());
  out << r.strategy << " (" << r.estimator << ", delta " << format_double(r.delta_map)
      << "): requests " << r.metrics.requests << ", skipped " << r.metrics.skipped << ", " << buf
      << '\n';
}

int serve_until_signal(const AppConfig& cfg, std::ostream& out) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  GatewayService service(cfg);
  const int port = service.bind(cfg.listen_host, cfg.listen_port);
  out << "listening on http://" << cfg.listen_host << ':' << port << std::endl;
  std::thread server([&] { service.run(); });
  int sig = 0;
  sigwait(&set, &sig);
  service.stop();
  server.join();
  return kExitOk;
}

}  // namespace

int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-aware request router for edge object detection", "edgeroute"};
  app.require_subcommand(1);

  // profile
  auto* profile = app.add_subcommand("profile", "profile tables");
  profile->require_subcommand(1);
  std::string profile_file, profile_rules, objectives = "map,energy", pareto_group, profile_out;
  auto* p_validate = profile->add_subcommand("validate", "check a profile table");
  p_validate->add_option("file", profile_file, "CSV or JSON table")->required();
  p_validate->add_option("--rules", profile_rules, "group rules to check coverage against");
  auto* p_pareto = profile->add_subcommand("pareto", "non-dominated entries");
  p_pareto->add_option("file", profile_file, "CSV or JSON table (default: seed profile)");
  p_pareto->add_option("--objectives", objectives, "comma list of map,latency,energy");
  p_pareto->add_option("--group", pareto_group, "restrict to one group");
  p_pareto->add_option("--out", profile_out, "output CSV (default: stdout)");
  auto* p_seed = profile->add_subcommand("seed", "write the built-in seed profile");
  p_seed->add_option("--out", profile_out, "output file, .csv or .json (default: stdout CSV)");

  // dataset
  auto* dataset = app.add_subcommand("dataset", "workload manifests");
  dataset->require_subcommand(1);
  std::string ds_in, ds_out, ds_format = "jsonl", ds_images, ds_frames, ds_ext = ".jpg", ds_rules,
                             ds_name;
  std::size_t per_group = 200, items = 1000;
  int image_size = 200;
  std::uint64_t ds_seed = 7;
  auto* d_build = dataset->add_subcommand("build", "balanced, group-sorted workload");
  d_build->add_option("--workload", ds_in, "source manifest")->required();
  d_build->add_option("--per-group", per_group, "items per group");
  d_build->add_option("--seed", ds_seed, "duplication seed");
  d_build->add_option("--rules", ds_rules, "group rules");
  d_build->add_option("--out", ds_out, "output manifest")->required();
  auto* d_import = dataset->add_subcommand("import", "convert annotations to a manifest");
  d_import->add_option("--format", ds_format, "jsonl|coco|yolo");
  d_import->add_option("--input", ds_in, "manifest, COCO JSON, or YOLO label dir")->required();
  d_import->add_option("--image-dir", ds_images, "COCO image directory");
  d_import->add_option("--frames-dir", ds_frames, "YOLO frame directory");
  d_import->add_option("--ext", ds_ext, "YOLO frame extension");
  d_import->add_option("--name", ds_name, "workload name");
  d_import->add_option("--rules", ds_rules, "group rules");
  d_import->add_option("--out", ds_out, "output manifest")->required();
  auto* d_synth = dataset->add_subcommand("synth", "synthetic rectangle images");
  d_synth->add_option("--items", items, "number of images");
  d_synth->add_option("--size", image_size, "image side in pixels");
  d_synth->add_option("--seed", ds_seed, "generator seed");
  d_synth->add_option("--rules", ds_rules, "group rules");
  d_synth->add_option("--out", ds_out, "output directory")->required();

  // run / sweep / serve
  ConfigFlags run_flags, sweep_flags, serve_flags;
  auto* run = app.add_subcommand("run", "replay one workload with one strategy");
  run_flags.attach(run);
  auto* sweep = app.add_subcommand("sweep", "replay over a list of deltas");
  sweep_flags.attach(sweep);
  std::string deltas = "0,5,10,15,20,25";
  sweep->add_option("--deltas", deltas, "comma list of delta values");
  auto* serve = app.add_subcommand("serve", "HTTP gateway");
  serve_flags.attach(serve);
  std::string host;
  int port = -1;
  auto* host_opt = serve->add_option("--host", host, "listen address");
  auto* port_opt = serve->add_option("--port", port, "listen port (0 picks one)");

  // report
  auto* report = app.add_subcommand("report", "report files");
  report->require_subcommand(1);
  std::vector<std::string> report_files;
  std::string summary_out;
  auto* r_sum = report->add_subcommand("summarize", "pivot reports into a summary CSV");
  r_sum->add_option("reports", report_files, "report JSON files")->required();
  r_sum->add_option("--out", summary_out, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*p_validate) {
      const auto table = load_profile_file(profile_file);
      out << table.source() << ": " << table.size() << " entries, " << table.pairs().size()
          << " pairs\n";
      const auto rules = profile_rules.empty() ? GroupRules::defaults() : GroupRules::parse(profile_rules);
      if (table.is_partial(rules)) out << "warning: some pairs lack entries for some groups\n";
      return kExitOk;
    }
    if (*p_pareto) {
      const auto table = profile_file.empty() ? seed_profile() : load_profile_file(profile_file);
      std::vector<Objective> objs;
      for (const auto& o : split_list(objectives)) objs.push_back(parse_objective(o));
      const auto scoped = pareto_group.empty() ? table : filter_by_group(table, pareto_group);
      const ProfileTable front(pareto_front(scoped.entries(), objs), scoped.source());
      if (profile_out.empty()) {
        write_profile_csv(out, front);
      } else {
        std::ofstream f(profile_out);
        if (!f) throw Error(ErrorKind::kIo, "cannot write " + profile_out);
        write_profile_csv(f, front);
        out << profile_out << '\n';
      }
      return kExitOk;
    }
    if (*p_seed) {
      const auto table = seed_profile();
      if (profile_out.empty()) {
        write_profile_csv(out, table);
      } else {
        std::ofstream f(profile_out);
        if (!f) throw Error(ErrorKind::kIo, "cannot write " + profile_out);
        if (fs::path(profile_out).extension() == ".json") {
          write_profile_json(f, table);
        } else {
          write_profile_csv(f, table);
        }
        out << profile_out << '\n';
      }
      return kExitOk;
    }

    const auto ds_group_rules = ds_rules.empty() ? GroupRules::defaults() : GroupRules::parse(ds_rules);
    if (*d_build) {
      const auto source = import_manifest_file(ds_in, ds_group_rules);
      const auto built = build_balanced_sorted(source, ds_group_rules, per_group, ds_seed);
      write_manifest_file(ds_out, built);
      out << ds_out << '\n';
      return kExitOk;
    }
    if (*d_import) {
      WorkloadManifest m;
      if (ds_format == "jsonl") {
        m = import_manifest_file(ds_in, ds_group_rules);
      } else if (ds_format == "coco") {
        std::ifstream in(ds_in);
        if (!in) throw Error(ErrorKind::kIo, "cannot open " + ds_in);
        m = import_coco(in, ds_group_rules, ds_images, ds_name.empty() ? "coco" : ds_name);
      } else if (ds_format == "yolo") {
        m = import_yolo_labels(ds_in, ds_frames.empty() ? ds_in : ds_frames, ds_group_rules, ds_ext,
                               ds_name.empty() ? "video" : ds_name);
      } else {
        throw Error(ErrorKind::kInvalidArgument, "unknown import format '" + ds_format + "'");
      }
      if (!ds_name.empty()) m.name = ds_name;
      write_manifest_file(ds_out, m);
      out << ds_out << " (" << m.items.size() << " items)\n";
      return kExitOk;
    }
    if (*d_synth) {
      SyntheticOptions opts;
      opts.items = items;
      opts.image_size = image_size;
      opts.seed = ds_seed;
      generate_synthetic_workload(ds_out, opts, ds_group_rules);
      out << (fs::path(ds_out) / "manifest.jsonl").string() << '\n';
      return kExitOk;
    }

    if (*run) {
      const auto cfg = run_flags.build();
      const auto workload = configured_workload(cfg);
      auto rep = replay(workload, cfg.resolved_strategy(), cfg.resolved_estimator(), replay_config(cfg));
      const auto path = write_report_to(cfg, rep);
      print_summary_line(out, rep);
      out << path.string() << '\n';
      return kExitOk;
    }
    if (*sweep) {
      const auto cfg = sweep_flags.build();
      const auto workload = configured_workload(cfg);
      std::vector<double> ds;
      for (const auto& d : split_list(deltas)) {
        auto v = parse_number<double>(d);
        if (!v) throw Error(ErrorKind::kInvalidArgument, "bad delta '" + d + "'");
        ds.push_back(*v);
      }
      std::vector<StrategySpec> specs;
      for (const auto& name : split_list(cfg.strategy)) {
        AppConfig one = cfg;
        one.strategy = name;
        specs.push_back({one.resolved_strategy(), one.resolved_estimator()});
      }
      auto reports = sweep_delta(workload, specs, ds, replay_config(cfg));
      for (auto& rep : reports) {
        AppConfig cell = cfg;
        cell.strategy = rep.strategy;
        cell.estimator = rep.estimator;
        cell.routing.delta_map = rep.delta_map;
        out << write_report_to(cell, rep).string() << '\n';
      }
      const fs::path summary = fs::path(cfg.out_dir) / "summary.csv";
      std::ofstream f(summary);
      if (!f) throw Error(ErrorKind::kIo, "cannot write " + summary.string());
      write_summary_csv(f, reports);
      out << summary.string() << '\n';
      return kExitOk;
    }
    if (*serve) {
      auto cfg = serve_flags.build();
      if (host_opt->count() > 0) cfg.listen_host = host;
      if (port_opt->count() > 0) cfg.listen_port = port;
      return serve_until_signal(cfg, out);
    }
    if (*r_sum) {
      std::vector<ExperimentReport> reports;
      for (const auto& file : report_files) {
        std::ifstream in(file);
        if (!in) throw Error(ErrorKind::kIo, "cannot open " + file);
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& ex) {
          throw Error(ErrorKind::kMalformedRecord, file + ": " + ex.what());
        }
        reports.push_back(report_from_json(doc));
      }
      if (summary_out.empty()) {
        write_summary_csv(out, reports);
      } else {
        std::ofstream f(summary_out);
        if (!f) throw Error(ErrorKind::kIo, "cannot write " + summary_out);
        write_summary_csv(f, reports);
        out << summary_out << '\n';
      }
      return kExitOk;
    }
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return is_validation_error(ex.kind()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace edgeroute
