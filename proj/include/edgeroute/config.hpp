#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeroute/backend.hpp"
#include "edgeroute/pipeline.hpp"
#include "edgeroute/router.hpp"

namespace edgeroute {

/// Operator configuration. Precedence, lowest first: built-in defaults, the
/// config file, ECORE_* environment variables, command-line flags.
struct AppConfig {
  std::string profile_path;  // empty: built-in seed profile
  std::string workload_path;
  std::string strategy = "greedy";
  std::optional<std::string> estimator;  // completes a bare "greedy"
  RoutingConfig routing;
  EstimatorConfig estimators;
  BackendConfig backend;
  std::vector<DeviceIdlePower> idle_powers;
  bool deterministic = false;
  std::uint64_t dataset_seed = 7;
  std::string out_dir = "out";
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;

  Strategy resolved_strategy() const;
  /// Estimator the resolved strategy runs with: the explicit one when given
  /// (baselines may take one too), else the strategy's default.
  EstimatorKind resolved_estimator() const;

  /// Checks delta and that referenced files exist. Throws InvalidArgument.
  void validate() const;
};

/// Reads a JSON config document. Unknown keys are rejected so typos fail
/// loudly. Relative profile and workload paths resolve against `base_dir`.
AppConfig config_from_json(const nlohmann::json& doc, AppConfig base = {},
                           const std::filesystem::path& base_dir = {});
AppConfig load_config_file(const std::filesystem::path& path, AppConfig base = {});

using EnvLookup = std::function<const char*(const char*)>;

/// Applies ECORE_PROFILE, ECORE_RULES, ECORE_STRATEGY, ECORE_ESTIMATOR,
/// ECORE_DELTA, ECORE_SEED, ECORE_FIDELITY_SEED, ECORE_DETERMINISTIC,
/// ECORE_OUT, ECORE_BACKEND_MODE, ECORE_REALTIME, ECORE_NETWORK_MS,
/// ECORE_MISS_RATE, ECORE_GATEWAY_POWER_W, ECORE_DETECTOR_CMD,
/// ECORE_DETECTOR_ADDRESS, ECORE_WORKLOAD, ECORE_HOST and ECORE_PORT.
void apply_env(AppConfig& cfg, const EnvLookup& env);
void apply_env(AppConfig& cfg);

/// Everything that influences results, for report headers.
nlohmann::json config_to_json(const AppConfig& cfg);

/// Profile named by the config, or the seed profile.
std::shared_ptr<const ProfileTable> load_configured_profile(const AppConfig& cfg);

BackendMode parse_backend_mode(std::string_view s);
FallbackPolicy parse_fallback(std::string_view s);

}  // namespace edgeroute
