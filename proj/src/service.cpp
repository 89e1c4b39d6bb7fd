#include "edgeroute/service.hpp"

#include <httplib.h>

#include <span>

#include "edgeroute/error.hpp"
#include "edgeroute/format.hpp"
#include "edgeroute/harness.hpp"

namespace edgeroute {
namespace {

using nlohmann::json;

json error_body(const Error& ex) {
  return {{"error", std::string(to_string(ex.kind()))}, {"message", ex.what()}};
}

void send(httplib::Response& res, const GatewayService::Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body.dump(), "application/json");
}

std::optional<std::uint64_t> parse_truth(const json& v) {
  if (v.is_null()) return std::nullopt;
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_string()) {
    if (auto n = parse_number<std::uint64_t>(v.get<std::string>())) return n;
  }
  throw Error(ErrorKind::kInvalidArgument, "truth_count must be a non-negative integer");
}

}  // namespace

int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingGroundTruth:
    case ErrorKind::kMissingTruth:
      return 422;
    case ErrorKind::kBackendUnreachable:
    case ErrorKind::kDetectorUnavailable:
    case ErrorKind::kDetectorProtocolError:
    case ErrorKind::kDetectorTimeout:
      return 503;
    default:
      return is_validation_error(kind) ? 400 : 500;
  }
}

GatewayService::GatewayService(AppConfig cfg)
    : cfg_(std::move(cfg)),
      strategy_(cfg_.resolved_strategy()),
      estimator_(cfg_.resolved_estimator()) {
  cfg_.validate();
  if (estimator_ == EstimatorKind::kSf) detector_ = open_detector(cfg_.estimators);
  snap_ = make_snapshot(load_configured_profile(cfg_), 1);
}

GatewayService::~GatewayService() { stop(); }

std::shared_ptr<GatewayService::Snapshot> GatewayService::make_snapshot(
    std::shared_ptr<const ProfileTable> table, std::uint64_t version) const {
  auto snap = std::make_shared<Snapshot>();
  snap->version = version;
  snap->table = table;
  auto backend = std::make_shared<Backend>(table, cfg_.backend);
  snap->pipeline = std::make_shared<GatewayPipeline>(table, cfg_.routing, cfg_.estimators, backend,
                                                     cfg_.deterministic, detector_);
  return snap;
}

std::shared_ptr<const GatewayService::Snapshot> GatewayService::snapshot() const {
  std::lock_guard lock(snap_mu_);
  return snap_;
}

std::shared_ptr<GatewayService::Stream> GatewayService::stream(const std::string& id) {
  std::lock_guard lock(streams_mu_);
  auto& s = streams_[id];
  if (!s) s = std::make_shared<Stream>(cfg_.estimators.ob_default, cfg_.routing.rnd_seed);
  return s;
}

GatewayService::Reply GatewayService::infer(Request req) {
  // One table version for the whole request, even if a reload lands meanwhile.
  const auto snap = snapshot();
  auto st = stream(req.stream_id);
  std::lock_guard stream_lock(st->mu);
  req.id = st->state.next_request_id++;

  CountEstimate est;
  try {
    est = snap->pipeline->estimate(req, estimator_, st->state);
  } catch (const Error& ex) {
    std::lock_guard lock(metrics_mu_);
    metrics_.add_skipped();
    return {http_status_for(ex.kind()), error_body(ex)};
  }
  RequestRecord rec;
  try {
    rec = snap->pipeline->complete(req, est, strategy_, st->state);
  } catch (const Error& ex) {
    return {http_status_for(ex.kind()), error_body(ex)};
  }
  {
    std::lock_guard lock(metrics_mu_);
    metrics_.add(rec);
  }

  json body{
      {"request_id", rec.request_id},
      {"stream_id", rec.stream_id},
      {"pair", rec.decision.pair.to_string()},
      {"group", rec.decision.group},
      {"estimated_count", rec.decision.estimated_count ? json(*rec.decision.estimated_count) : json()},
      {"detected_count", rec.response.detected_count},
      {"latency_ms",
       {{"gateway", rec.gateway_ms},
        {"network", rec.response.network_ms},
        {"inference", rec.response.inference_ms},
        {"total", rec.latency_ms()}}},
      {"energy_mwh", rec.response.energy_mwh + rec.gateway_mwh},
      {"energy_breakdown_mwh", {{"backend", rec.response.energy_mwh}, {"gateway", rec.gateway_mwh}}},
      {"decision", to_json(rec.decision)},
      {"profile_version", snap->version},
  };
  body["credited_map"] = rec.credited_map ? json(*rec.credited_map) : json();
  return {200, std::move(body)};
}

json GatewayService::metrics() const {
  json j;
  {
    std::lock_guard lock(metrics_mu_);
    j = to_json(metrics_.snapshot());
  }
  const auto snap = snapshot();
  j["profile_version"] = snap->version;
  j["profile_source"] = snap->table->source();
  j["strategy"] = std::string(to_string(strategy_));
  j["estimator"] = std::string(to_string(estimator_));
  j["delta_map"] = cfg_.routing.delta_map;
  return j;
}

GatewayService::Reply GatewayService::reload_profile(const std::string& path) {
  std::shared_ptr<const ProfileTable> table;
  try {
    if (path.empty()) {
      table = load_configured_profile(cfg_);
    } else {
      table = std::make_shared<const ProfileTable>(load_profile_file(path));
    }
  } catch (const Error& ex) {
    return {ex.kind() == ErrorKind::kIo ? 400 : http_status_for(ex.kind()), error_body(ex)};
  }
  std::lock_guard lock(snap_mu_);
  auto next = make_snapshot(table, snap_->version + 1);
  snap_ = next;
  return {200,
          {{"profile_version", next->version},
           {"profile_source", table->source()},
           {"entries", table->size()}}};
}

void GatewayService::install_routes() {
  auto& srv = *server_;
  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });

  srv.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(metrics().dump(), "application/json");
  });

  srv.Post("/infer", [this](const httplib::Request& hreq, httplib::Response& res) {
    Request req;
    req.stream_id = hreq.remote_addr + ":" + std::to_string(hreq.remote_port);
    try {
      if (hreq.is_multipart_form_data()) {
        if (!hreq.has_file("image")) {
          throw Error(ErrorKind::kInvalidArgument, "multipart body needs an 'image' part");
        }
        const auto part = hreq.get_file_value("image");
        const auto* data = reinterpret_cast<const std::uint8_t*>(part.content.data());
        req.inline_image = std::make_shared<const ImageRaster>(
            decode_pnm(std::span<const std::uint8_t>(data, part.content.size())));
        req.image_ref = part.filename;
        if (hreq.has_file("truth_count")) {
          req.truth_count = parse_truth(json(hreq.get_file_value("truth_count").content));
        }
        if (hreq.has_file("stream_id")) req.stream_id = hreq.get_file_value("stream_id").content;
      } else {
        const auto doc = json::parse(hreq.body);
        if (!doc.is_object() || !doc.contains("image") || !doc.at("image").is_string()) {
          throw Error(ErrorKind::kInvalidArgument, "body needs a string field 'image'");
        }
        req.image_ref = doc.at("image").get<std::string>();
        if (doc.contains("truth_count")) req.truth_count = parse_truth(doc.at("truth_count"));
        if (doc.contains("stream_id")) req.stream_id = doc.at("stream_id").get<std::string>();
      }
    } catch (const json::exception& ex) {
      send(res, {400, {{"error", "malformed_request"}, {"message", ex.what()}}});
      return;
    } catch (const Error& ex) {
      send(res, {400, error_body(ex)});
      return;
    }
    send(res, infer(std::move(req)));
  });

  srv.Post("/admin/reload-profile", [this](const httplib::Request& hreq, httplib::Response& res) {
    std::string path;
    if (!hreq.body.empty()) {
      try {
        const auto doc = json::parse(hreq.body);
        path = doc.value("path", "");
      } catch (const json::exception& ex) {
        send(res, {400, {{"error", "malformed_request"}, {"message", ex.what()}}});
        return;
      }
    }
    send(res, reload_profile(path));
  });
}

int GatewayService::bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  install_routes();
  if (port == 0) {
    port = server_->bind_to_any_port(host);
    if (port < 0) throw Error(ErrorKind::kIo, "cannot bind " + host);
  } else if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void GatewayService::run() {
  if (!server_) throw Error(ErrorKind::kInvalidArgument, "bind() before run()");
  server_->listen_after_bind();
}

void GatewayService::stop() {
  if (server_) server_->stop();
}

}  // namespace edgeroute
