#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "edgeroute/config.hpp"
#include "edgeroute/error.hpp"
#include "edgeroute/metrics.hpp"
#include "edgeroute/pipeline.hpp"

namespace httplib {
class Server;
}

namespace edgeroute {

/// HTTP status for an error raised while serving a request.
int http_status_for(ErrorKind kind);

/// Live gateway. Routes each POST /infer through the same pipeline the
/// offline harness uses; state is kept per stream_id.
class GatewayService {
 public:
  explicit GatewayService(AppConfig cfg);
  ~GatewayService();
  GatewayService(const GatewayService&) = delete;
  GatewayService& operator=(const GatewayService&) = delete;

  struct Reply {
    int status = 200;
    nlohmann::json body;
  };

  /// Transport-free request handling, used by the HTTP handlers.
  Reply infer(Request req);
  nlohmann::json metrics() const;
  /// Reloads from `path`, or from the configured profile when empty.
  Reply reload_profile(const std::string& path);

  /// Binds (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void run();
  void stop();

 private:
  struct Snapshot {
    std::uint64_t version = 0;
    std::shared_ptr<const ProfileTable> table;
    std::shared_ptr<GatewayPipeline> pipeline;
  };
  struct Stream {
    std::mutex mu;
    StreamState state;
    explicit Stream(std::uint64_t ob_default, std::uint64_t seed) : state(ob_default, seed) {}
  };

  std::shared_ptr<const Snapshot> snapshot() const;
  std::shared_ptr<Snapshot> make_snapshot(std::shared_ptr<const ProfileTable> table,
                                          std::uint64_t version) const;
  std::shared_ptr<Stream> stream(const std::string& id);
  void install_routes();

  AppConfig cfg_;
  Strategy strategy_;
  EstimatorKind estimator_;
  std::shared_ptr<DetectorHandle> detector_;

  mutable std::mutex snap_mu_;
  std::shared_ptr<const Snapshot> snap_;

  std::mutex streams_mu_;
  std::map<std::string, std::shared_ptr<Stream>> streams_;

  mutable std::mutex metrics_mu_;
  MetricsAccumulator metrics_;

  std::unique_ptr<httplib::Server> server_;
};

}  // namespace edgeroute
