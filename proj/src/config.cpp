#include "edgeroute/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "edgeroute/error.hpp"
#include "edgeroute/format.hpp"

namespace edgeroute {
namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) {
    throw Error(ErrorKind::kInvalidArgument, std::string(where) + " must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) {
      throw Error(ErrorKind::kInvalidArgument,
                  "unknown config key '" + key + "' in " + std::string(where));
    }
  }
}

GroupRules rules_from_json(const json& j) {
  if (j.is_string()) return GroupRules::parse(j.get<std::string>());
  if (!j.is_array()) {
    throw Error(ErrorKind::kInvalidArgument, "rules must be a string or an array");
  }
  std::vector<GroupRule> rules;
  for (const auto& r : j) {
    check_keys(r, {"min", "max", "label"}, "rules[]");
    GroupRule rule;
    rule.lo = r.at("min").get<std::uint64_t>();
    if (r.contains("max") && !r.at("max").is_null()) rule.hi = r.at("max").get<std::uint64_t>();
    rule.label = r.at("label").get<std::string>();
    rules.push_back(std::move(rule));
  }
  return GroupRules(std::move(rules));
}

Fidelity fidelity_from_json(const json& j, Fidelity f) {
  check_keys(j, {"kind", "miss_rate", "seed"}, "fidelity");
  if (j.contains("kind")) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "exact") {
      f.kind = Fidelity::Kind::kExact;
    } else if (kind == "miss_rate") {
      f.kind = Fidelity::Kind::kMissRate;
    } else {
      throw Error(ErrorKind::kInvalidArgument, "fidelity kind must be exact or miss_rate");
    }
  }
  if (j.contains("miss_rate")) {
    f.miss_rate = j.at("miss_rate").get<double>();
    if (!j.contains("kind")) f.kind = Fidelity::Kind::kMissRate;
  }
  if (j.contains("seed")) f.seed = j.at("seed").get<std::uint64_t>();
  return f;
}

json fidelity_to_json(const Fidelity& f) {
  return {{"kind", f.kind == Fidelity::Kind::kExact ? "exact" : "miss_rate"},
          {"miss_rate", f.miss_rate},
          {"seed", f.seed}};
}

std::vector<std::string> split_words(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return base / p;
}

template <typename T>
T env_number(const char* name, const char* value) {
  auto v = parse_number<T>(value);
  if (!v) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(name) + " is not a valid number: '" + value + "'");
  }
  return *v;
}

bool parse_bool(const char* name, std::string_view v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
  throw Error(ErrorKind::kInvalidArgument, std::string(name) + " is not a boolean");
}

}  // namespace

BackendMode parse_backend_mode(std::string_view s) {
  if (s == "simulate" || s == "sim") return BackendMode::kSimulate;
  if (s == "http") return BackendMode::kHttp;
  throw Error(ErrorKind::kInvalidArgument,
              "backend mode must be simulate or http, got '" + std::string(s) + "'");
}

FallbackPolicy parse_fallback(std::string_view s) {
  if (s == "error") return FallbackPolicy::kError;
  if (s == "global_table" || s == "global-table" || s == "global") {
    return FallbackPolicy::kGlobalTable;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "fallback must be error or global_table, got '" + std::string(s) + "'");
}

Strategy AppConfig::resolved_strategy() const {
  std::optional<EstimatorKind> est;
  if (estimator) est = parse_estimator(*estimator);
  return parse_strategy(strategy, est);
}

EstimatorKind AppConfig::resolved_estimator() const {
  if (estimator) return parse_estimator(*estimator);
  return default_estimator(resolved_strategy());
}

void AppConfig::validate() const {
  if (!(routing.delta_map >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "delta must be >= 0");
  }
  if (!profile_path.empty() && !std::filesystem::exists(profile_path)) {
    throw Error(ErrorKind::kInvalidArgument, "profile not found: " + profile_path);
  }
  if (!workload_path.empty() && !std::filesystem::exists(workload_path)) {
    throw Error(ErrorKind::kInvalidArgument, "workload not found: " + workload_path);
  }
  if (estimators.gateway_power_w < 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "gateway power must be >= 0");
  }
  for (const auto& d : idle_powers) {
    if (d.idle_power_w < 0.0) {
      throw Error(ErrorKind::kInvalidArgument, "idle power of " + d.device_id + " is negative");
    }
  }
  if (listen_port < 0 || listen_port > 65535) {
    throw Error(ErrorKind::kInvalidArgument, "port out of range");
  }
  backend.validate();
  (void)resolved_strategy();
  (void)resolved_estimator();
}

AppConfig config_from_json(const json& doc, AppConfig cfg, const std::filesystem::path& base_dir) {
  try {
    check_keys(doc,
               {"profile", "workload", "rules", "strategy", "estimator", "delta_map", "seeds",
                "fallback", "ed", "detector", "ob_default", "backend", "gateway_power_w",
                "idle_power_w", "deterministic", "deterministic_overhead_ms", "out_dir",
                "listen"},
               "config");
    if (doc.contains("profile")) {
      cfg.profile_path = resolve(base_dir, doc.at("profile").get<std::string>()).string();
    }
    if (doc.contains("workload")) {
      cfg.workload_path = resolve(base_dir, doc.at("workload").get<std::string>()).string();
    }
    if (doc.contains("rules")) cfg.routing.rules = rules_from_json(doc.at("rules"));
    if (doc.contains("strategy")) cfg.strategy = doc.at("strategy").get<std::string>();
    if (doc.contains("estimator")) cfg.estimator = doc.at("estimator").get<std::string>();
    if (doc.contains("delta_map")) cfg.routing.delta_map = doc.at("delta_map").get<double>();
    if (doc.contains("seeds")) {
      const auto& s = doc.at("seeds");
      check_keys(s, {"rnd", "fidelity", "dataset"}, "seeds");
      if (s.contains("rnd")) cfg.routing.rnd_seed = s.at("rnd").get<std::uint64_t>();
      if (s.contains("fidelity")) cfg.backend.fidelity.seed = s.at("fidelity").get<std::uint64_t>();
      if (s.contains("dataset")) cfg.dataset_seed = s.at("dataset").get<std::uint64_t>();
    }
    if (doc.contains("fallback")) {
      cfg.routing.fallback = parse_fallback(doc.at("fallback").get<std::string>());
    }
    if (doc.contains("ed")) {
      const auto& e = doc.at("ed");
      check_keys(e, {"sigma", "t_low", "t_high", "closing_radius", "min_area_fraction"}, "ed");
      auto& ed = cfg.estimators.ed;
      ed.canny.sigma = e.value("sigma", ed.canny.sigma);
      ed.canny.t_low = e.value("t_low", ed.canny.t_low);
      ed.canny.t_high = e.value("t_high", ed.canny.t_high);
      ed.closing_radius = e.value("closing_radius", ed.closing_radius);
      ed.min_area_fraction = e.value("min_area_fraction", ed.min_area_fraction);
    }
    if (doc.contains("detector")) {
      const auto& d = doc.at("detector");
      check_keys(d, {"command", "address", "timeout_ms"}, "detector");
      if (d.contains("command")) {
        const auto& c = d.at("command");
        cfg.estimators.detector_command =
            c.is_string() ? split_words(c.get<std::string>()) : c.get<std::vector<std::string>>();
      }
      if (d.contains("address")) cfg.estimators.detector_address = d.at("address").get<std::string>();
      if (d.contains("timeout_ms")) {
        cfg.estimators.detector_timeout = std::chrono::milliseconds(d.at("timeout_ms").get<int>());
      }
    }
    if (doc.contains("ob_default")) cfg.estimators.ob_default = doc.at("ob_default").get<std::uint64_t>();
    if (doc.contains("backend")) {
      const auto& b = doc.at("backend");
      check_keys(b, {"mode", "network_ms", "fidelity", "per_pair", "endpoints", "realtime",
                     "http_timeout_s"},
                 "backend");
      if (b.contains("mode")) cfg.backend.mode = parse_backend_mode(b.at("mode").get<std::string>());
      cfg.backend.network_ms = b.value("network_ms", cfg.backend.network_ms);
      if (b.contains("fidelity")) cfg.backend.fidelity = fidelity_from_json(b.at("fidelity"), cfg.backend.fidelity);
      if (b.contains("per_pair")) {
        for (const auto& [pair, f] : b.at("per_pair").items()) {
          cfg.backend.per_pair[PairId::parse(pair)] = fidelity_from_json(f, cfg.backend.fidelity);
        }
      }
      if (b.contains("endpoints")) {
        for (const auto& [pair, url] : b.at("endpoints").items()) {
          cfg.backend.endpoints[PairId::parse(pair)] = url.get<std::string>();
        }
      }
      cfg.backend.realtime = b.value("realtime", cfg.backend.realtime);
      cfg.backend.http_timeout_s = b.value("http_timeout_s", cfg.backend.http_timeout_s);
    }
    if (doc.contains("gateway_power_w")) {
      cfg.estimators.gateway_power_w = doc.at("gateway_power_w").get<double>();
    }
    if (doc.contains("idle_power_w")) {
      cfg.idle_powers.clear();
      for (const auto& [dev, w] : doc.at("idle_power_w").items()) {
        cfg.idle_powers.push_back({dev, w.get<double>()});
      }
    }
    if (doc.contains("deterministic")) cfg.deterministic = doc.at("deterministic").get<bool>();
    if (doc.contains("deterministic_overhead_ms")) {
      for (const auto& [k, v] : doc.at("deterministic_overhead_ms").items()) {
        cfg.estimators.deterministic_overhead_ms[parse_estimator(k)] = v.get<double>();
      }
    }
    if (doc.contains("out_dir")) cfg.out_dir = doc.at("out_dir").get<std::string>();
    if (doc.contains("listen")) {
      const auto& l = doc.at("listen");
      check_keys(l, {"host", "port"}, "listen");
      cfg.listen_host = l.value("host", cfg.listen_host);
      cfg.listen_port = l.value("port", cfg.listen_port);
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad config: ") + ex.what());
  }
  return cfg;
}

AppConfig load_config_file(const std::filesystem::path& path, AppConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw Error(ErrorKind::kInvalidArgument, path.string() + ": " + ex.what());
  }
  return config_from_json(doc, std::move(base), path.parent_path());
}

void apply_env(AppConfig& cfg, const EnvLookup& env) {
  auto get = [&](const char* name) -> const char* { return env(name); };
  if (auto v = get("ECORE_PROFILE")) cfg.profile_path = v;
  if (auto v = get("ECORE_WORKLOAD")) cfg.workload_path = v;
  if (auto v = get("ECORE_RULES")) cfg.routing.rules = GroupRules::parse(v);
  if (auto v = get("ECORE_STRATEGY")) cfg.strategy = v;
  if (auto v = get("ECORE_ESTIMATOR")) cfg.estimator = std::string(v);
  if (auto v = get("ECORE_DELTA")) cfg.routing.delta_map = env_number<double>("ECORE_DELTA", v);
  if (auto v = get("ECORE_SEED")) cfg.routing.rnd_seed = env_number<std::uint64_t>("ECORE_SEED", v);
  if (auto v = get("ECORE_FIDELITY_SEED")) {
    cfg.backend.fidelity.seed = env_number<std::uint64_t>("ECORE_FIDELITY_SEED", v);
  }
  if (auto v = get("ECORE_DETERMINISTIC")) cfg.deterministic = parse_bool("ECORE_DETERMINISTIC", v);
  if (auto v = get("ECORE_OUT")) cfg.out_dir = v;
  if (auto v = get("ECORE_BACKEND_MODE")) cfg.backend.mode = parse_backend_mode(v);
  if (auto v = get("ECORE_REALTIME")) cfg.backend.realtime = parse_bool("ECORE_REALTIME", v);
  if (auto v = get("ECORE_NETWORK_MS")) {
    cfg.backend.network_ms = env_number<double>("ECORE_NETWORK_MS", v);
  }
  if (auto v = get("ECORE_MISS_RATE")) {
    cfg.backend.fidelity.kind = Fidelity::Kind::kMissRate;
    cfg.backend.fidelity.miss_rate = env_number<double>("ECORE_MISS_RATE", v);
  }
  if (auto v = get("ECORE_GATEWAY_POWER_W")) {
    cfg.estimators.gateway_power_w = env_number<double>("ECORE_GATEWAY_POWER_W", v);
  }
  if (auto v = get("ECORE_DETECTOR_CMD")) cfg.estimators.detector_command = split_words(v);
  if (auto v = get("ECORE_DETECTOR_ADDRESS")) cfg.estimators.detector_address = v;
  if (auto v = get("ECORE_HOST")) cfg.listen_host = v;
  if (auto v = get("ECORE_PORT")) cfg.listen_port = env_number<int>("ECORE_PORT", v);
}

void apply_env(AppConfig& cfg) {
  apply_env(cfg, [](const char* n) -> const char* { return std::getenv(n); });
}

nlohmann::json config_to_json(const AppConfig& cfg) {
  json j;
  j["profile"] = cfg.profile_path.empty() ? "builtin:seed" : cfg.profile_path;
  j["rules"] = cfg.routing.rules.to_string();
  j["strategy"] = std::string(to_string(cfg.resolved_strategy()));
  j["estimator"] = std::string(to_string(cfg.resolved_estimator()));
  j["delta_map"] = cfg.routing.delta_map;
  j["fallback"] = cfg.routing.fallback == FallbackPolicy::kError ? "error" : "global_table";
  j["seeds"] = {{"rnd", cfg.routing.rnd_seed},
                {"fidelity", cfg.backend.fidelity.seed},
                {"dataset", cfg.dataset_seed}};
  const auto& ed = cfg.estimators.ed;
  j["ed"] = {{"sigma", ed.canny.sigma},
             {"t_low", ed.canny.t_low},
             {"t_high", ed.canny.t_high},
             {"closing_radius", ed.closing_radius},
             {"min_area_fraction", ed.min_area_fraction}};
  j["ob_default"] = cfg.estimators.ob_default;
  j["gateway_power_w"] = cfg.estimators.gateway_power_w;
  json backend{{"mode", cfg.backend.mode == BackendMode::kSimulate ? "simulate" : "http"},
               {"network_ms", cfg.backend.network_ms},
               {"fidelity", fidelity_to_json(cfg.backend.fidelity)},
               {"realtime", cfg.backend.realtime}};
  if (!cfg.backend.per_pair.empty()) {
    json pp = json::object();
    for (const auto& [pair, f] : cfg.backend.per_pair) pp[pair.to_string()] = fidelity_to_json(f);
    backend["per_pair"] = std::move(pp);
  }
  j["backend"] = std::move(backend);
  json idle = json::object();
  for (const auto& d : cfg.idle_powers) idle[d.device_id] = d.idle_power_w;
  j["idle_power_w"] = std::move(idle);
  j["deterministic"] = cfg.deterministic;
  if (cfg.deterministic) {
    json oh = json::object();
    for (const auto& [k, v] : cfg.estimators.deterministic_overhead_ms) oh[std::string(to_string(k))] = v;
    j["deterministic_overhead_ms"] = std::move(oh);
  }
  return j;
}

std::shared_ptr<const ProfileTable> load_configured_profile(const AppConfig& cfg) {
  if (cfg.profile_path.empty()) return std::make_shared<const ProfileTable>(seed_profile());
  return std::make_shared<const ProfileTable>(load_profile_file(cfg.profile_path));
}

}  // namespace edgeroute
