#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

namespace edgeroute {

// Line protocol spoken between the gateway and a front-end detector:
//   gateway -> "HELLO ecore-detector 1"   detector -> "READY"
//   gateway -> "DETECT <image-path>"      detector -> "COUNT <n>" | "ERR <message>"
inline constexpr std::string_view kDetectorHello = "HELLO ecore-detector 1";
inline constexpr std::string_view kDetectorReady = "READY";

/// Connection to an external detector process over a byte stream. Requests
/// on one handle are serialized.
class DetectorHandle {
 public:
  /// Spawns `argv` with its stdin/stdout attached and performs the handshake.
  static DetectorHandle spawn(const std::vector<std::string>& argv,
                              std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  /// Connects to host:port over TCP and performs the handshake.
  static DetectorHandle connect_tcp(const std::string& host, std::uint16_t port,
                                    std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

  DetectorHandle(DetectorHandle&& other) noexcept;
  DetectorHandle& operator=(DetectorHandle&& other) noexcept;
  DetectorHandle(const DetectorHandle&) = delete;
  DetectorHandle& operator=(const DetectorHandle&) = delete;
  ~DetectorHandle();

  /// Errors: DetectorUnavailable (peer gone), DetectorProtocolError (bad
  /// reply or ERR), DetectorTimeout.
  std::uint64_t detect(const std::string& image_path);

  /// Child pid in spawn mode, -1 otherwise.
  pid_t pid() const { return pid_; }
  void set_timeout(std::chrono::milliseconds t) { timeout_ = t; }

 private:
  DetectorHandle(int read_fd, int write_fd, pid_t pid, std::chrono::milliseconds timeout);
  void handshake();
  void send_line(std::string_view line);
  std::string read_line();
  void close_all() noexcept;

  int read_fd_ = -1;
  int write_fd_ = -1;
  pid_t pid_ = -1;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
  bool broken_ = false;
  std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

/// Reference detector used for desk-scale runs: answers DETECT by reading the
/// `<image>.count` sidecar and dropping each object with probability p.
class StubDetector {
 public:
  struct Options {
    double drop_probability = 0.0;
    std::uint64_t seed = 0;
    std::chrono::milliseconds delay{0};
  };

  explicit StubDetector(Options opts);

  /// One protocol line in, one reply line out (without the newline).
  /// Returns nullopt when the line should close the session.
  std::optional<std::string> handle(std::string_view line);

  /// Serves the protocol on the given descriptors until EOF.
  void serve(int in_fd, int out_fd);

 private:
  Options opts_;
  std::mt19937_64 rng_;
  bool greeted_ = false;
};

/// Reads the decimal integer in `<image>.count`.
std::uint64_t read_sidecar_count(const std::filesystem::path& image);
void write_sidecar_count(const std::filesystem::path& image, std::uint64_t count);

}  // namespace edgeroute
