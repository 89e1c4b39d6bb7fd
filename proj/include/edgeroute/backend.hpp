#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "edgeroute/profile.hpp"
#include "edgeroute/router.hpp"
#include "edgeroute/types.hpp"

namespace edgeroute {

enum class BackendMode { kSimulate, kHttp };

/// How a simulated pair turns the true count into a detected count.
struct Fidelity {
  enum class Kind { kExact, kMissRate };
  Kind kind = Kind::kExact;
  double miss_rate = 0.0;  // per-object drop probability under kMissRate
  std::uint64_t seed = 0;
};

struct BackendConfig {
  BackendMode mode = BackendMode::kSimulate;
  double network_ms = 0.0;
  Fidelity fidelity;                      // default for every pair
  std::map<PairId, Fidelity> per_pair;    // overrides
  std::map<PairId, std::string> endpoints;  // http mode: base URL per pair
  bool realtime = false;                  // sleep for simulated time
  double http_timeout_s = 10.0;

  void validate() const;
};

struct PairCounters {
  std::uint64_t requests = 0;
  double energy_mwh = 0.0;
  double inference_ms = 0.0;
};

/// Stand-in for the edge-device pool. dispatch() is safe to call
/// concurrently.
class Backend {
 public:
  Backend(std::shared_ptr<const ProfileTable> table, BackendConfig cfg);

  /// Errors: UnknownPair, MissingTruth (simulate + exact without truth),
  /// BackendUnreachable (http mode).
  DetectionResponse dispatch(const RoutingDecision& decision, const Request& req);

  std::map<PairId, PairCounters> counters() const;
  const BackendConfig& config() const { return cfg_; }

 private:
  DetectionResponse dispatch_http(const RoutingDecision& decision, const Request& req,
                                  const ProfileEntry& entry);
  std::mt19937_64& rng_for(const PairId& pair, const Fidelity& f);

  std::shared_ptr<const ProfileTable> table_;
  BackendConfig cfg_;
  mutable std::mutex mu_;
  std::map<PairId, PairCounters> counters_;
  std::map<PairId, std::mt19937_64> rngs_;
};

struct DeviceIdlePower {
  std::string device_id;
  double idle_power_w = 0.0;
};

/// Idle energy of the given devices over `duration_s`, in mWh
/// (3.6 W*s = 1 mWh).
double idle_baseline(double duration_s, std::span<const DeviceIdlePower> devices);

}  // namespace edgeroute
