#include "edgeroute/backend.hpp"

#include <chrono>
#include <fstream>
#include <iterator>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "edgeroute/error.hpp"

namespace edgeroute {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_bytes(const Request& req) {
  if (req.inline_image) {
    auto bytes = encode_pnm(*req.inline_image);
    return std::string(bytes.begin(), bytes.end());
  }
  std::ifstream in(req.image_ref, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read image " + req.image_ref);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

void BackendConfig::validate() const {
  if (!(network_ms >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "network_ms must be >= 0");
  auto check = [](const Fidelity& f) {
    if (!(f.miss_rate >= 0.0 && f.miss_rate <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "miss_rate must lie in [0, 1]");
    }
  };
  check(fidelity);
  for (const auto& [pair, f] : per_pair) check(f);
}

Backend::Backend(std::shared_ptr<const ProfileTable> table, BackendConfig cfg)
    : table_(std::move(table)), cfg_(std::move(cfg)) {
  cfg_.validate();
}

std::mt19937_64& Backend::rng_for(const PairId& pair, const Fidelity& f) {
  auto it = rngs_.find(pair);
  if (it == rngs_.end()) {
    std::seed_seq seq{f.seed, fnv1a(pair.to_string())};
    it = rngs_.emplace(pair, std::mt19937_64(seq)).first;
  }
  return it->second;
}

DetectionResponse Backend::dispatch(const RoutingDecision& decision, const Request& req) {
  const ProfileEntry* entry = table_->find(decision.pair, decision.entry_group);
  if (!entry) {
    throw Error(ErrorKind::kUnknownPair, decision.pair.to_string() + " has no profile entry for group '" +
                                             decision.entry_group + "'");
  }
  if (cfg_.mode == BackendMode::kHttp) return dispatch_http(decision, req, *entry);

  const auto fit = cfg_.per_pair.find(decision.pair);
  const Fidelity& fidelity = fit == cfg_.per_pair.end() ? cfg_.fidelity : fit->second;
  if (!req.truth_count) {
    throw Error(ErrorKind::kMissingTruth, "simulated backend needs the true count of request " +
                                              std::to_string(req.id));
  }
  DetectionResponse resp;
  resp.request_id = req.id;
  resp.pair = decision.pair;
  resp.inference_ms = entry->latency_ms;
  resp.energy_mwh = entry->energy_mwh;
  resp.network_ms = cfg_.network_ms;
  resp.detected_count = *req.truth_count;
  {
    std::lock_guard lock(mu_);
    if (fidelity.kind == Fidelity::Kind::kMissRate && *req.truth_count > 0) {
      if (fidelity.miss_rate >= 1.0) {
        resp.detected_count = 0;
      } else if (fidelity.miss_rate > 0.0) {
        std::binomial_distribution<std::uint64_t> keep(*req.truth_count, 1.0 - fidelity.miss_rate);
        resp.detected_count = keep(rng_for(decision.pair, fidelity));
      }
    }
    auto& c = counters_[decision.pair];
    ++c.requests;
    c.energy_mwh += resp.energy_mwh;
    c.inference_ms += resp.inference_ms;
  }
  if (cfg_.realtime) {
    std::this_thread::sleep_for(
        std::chrono::duration<double, std::milli>(resp.inference_ms + resp.network_ms));
  }
  return resp;
}

DetectionResponse Backend::dispatch_http(const RoutingDecision& decision, const Request& req,
                                         const ProfileEntry& entry) {
  const auto ep = cfg_.endpoints.find(decision.pair);
  if (ep == cfg_.endpoints.end()) {
    throw Error(ErrorKind::kUnknownPair, "no endpoint configured for " + decision.pair.to_string());
  }
  const std::string body = read_bytes(req);
  httplib::Client client(ep->second);
  const auto secs = static_cast<time_t>(cfg_.http_timeout_s);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  auto res = client.Post("/infer", body, "application/octet-stream");
  if (!res) {
    throw Error(ErrorKind::kBackendUnreachable,
                ep->second + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorKind::kBackendUnreachable,
                ep->second + " answered HTTP " + std::to_string(res->status));
  }
  DetectionResponse resp;
  resp.request_id = req.id;
  resp.pair = decision.pair;
  resp.energy_mwh = entry.energy_mwh;
  resp.network_ms = cfg_.network_ms;
  try {
    const auto doc = nlohmann::json::parse(res->body);
    const auto count = doc.at("count").get<std::int64_t>();
    if (count < 0) throw Error(ErrorKind::kBackendUnreachable, "negative count from backend");
    resp.detected_count = static_cast<std::uint64_t>(count);
    resp.inference_ms = doc.value("inference_ms", entry.latency_ms);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::kBackendUnreachable, "bad backend reply: " + std::string(ex.what()));
  }
  std::lock_guard lock(mu_);
  auto& c = counters_[decision.pair];
  ++c.requests;
  c.energy_mwh += resp.energy_mwh;
  c.inference_ms += resp.inference_ms;
  return resp;
}

std::map<PairId, PairCounters> Backend::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

double idle_baseline(double duration_s, std::span<const DeviceIdlePower> devices) {
  if (!(duration_s >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "duration must be >= 0");
  double total = 0.0;
  for (const auto& d : devices) {
    if (!(d.idle_power_w >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "idle power must be >= 0");
    }
    total += d.idle_power_w * duration_s / 3.6;
  }
  return total;
}

}  // namespace edgeroute
