#include "edgeroute/detector.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <thread>

#include "edgeroute/error.hpp"

namespace edgeroute {
namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::optional<std::uint64_t> parse_count(std::string_view text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

DetectorHandle::DetectorHandle(int read_fd, int write_fd, pid_t pid,
                               std::chrono::milliseconds timeout)
    : read_fd_(read_fd), write_fd_(write_fd), pid_(pid), timeout_(timeout) {}

DetectorHandle::DetectorHandle(DetectorHandle&& o) noexcept
    : read_fd_(o.read_fd_), write_fd_(o.write_fd_), pid_(o.pid_), timeout_(o.timeout_),
      buffer_(std::move(o.buffer_)), broken_(o.broken_), mu_(std::move(o.mu_)) {
  o.read_fd_ = o.write_fd_ = -1;
  o.pid_ = -1;
}

DetectorHandle& DetectorHandle::operator=(DetectorHandle&& o) noexcept {
  if (this != &o) {
    close_all();
    read_fd_ = o.read_fd_;
    write_fd_ = o.write_fd_;
    pid_ = o.pid_;
    timeout_ = o.timeout_;
    buffer_ = std::move(o.buffer_);
    broken_ = o.broken_;
    mu_ = std::move(o.mu_);
    o.read_fd_ = o.write_fd_ = -1;
    o.pid_ = -1;
  }
  return *this;
}

DetectorHandle::~DetectorHandle() { close_all(); }

void DetectorHandle::close_all() noexcept {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  read_fd_ = write_fd_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGTERM);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

DetectorHandle DetectorHandle::spawn(const std::vector<std::string>& argv,
                                     std::chrono::milliseconds timeout) {
  if (argv.empty()) throw Error(ErrorKind::kInvalidArgument, "detector command is empty");
  ignore_sigpipe();
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) {
    throw Error(ErrorKind::kDetectorUnavailable, std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(ErrorKind::kDetectorUnavailable, std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    throw Error(ErrorKind::kDetectorUnavailable, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    ::execvp(cargv[0], cargv.data());
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  DetectorHandle handle(from_child[0], to_child[1], pid, timeout);
  handle.handshake();
  return handle;
}

DetectorHandle DetectorHandle::connect_tcp(const std::string& host, std::uint16_t port,
                                           std::chrono::milliseconds timeout) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw Error(ErrorKind::kDetectorUnavailable, "cannot resolve detector host " + host);
  }
  int fd = -1;
  for (auto* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw Error(ErrorKind::kDetectorUnavailable,
                "cannot connect to detector at " + host + ":" + std::to_string(port));
  }
  DetectorHandle handle(fd, fd, -1, timeout);
  handle.handshake();
  return handle;
}

void DetectorHandle::handshake() {
  send_line(kDetectorHello);
  auto reply = read_line();
  if (trim(reply) != kDetectorReady) {
    throw Error(ErrorKind::kDetectorProtocolError, "expected READY, got '" + reply + "'");
  }
}

void DetectorHandle::send_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw Error(ErrorKind::kDetectorUnavailable,
                  std::string("write to detector failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string DetectorHandle::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      broken_ = true;
      throw Error(ErrorKind::kDetectorTimeout, "detector did not answer within " +
                                                   std::to_string(timeout_.count()) + " ms");
    }
    pollfd pfd{read_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw Error(ErrorKind::kDetectorUnavailable, std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[512];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      broken_ = true;
      throw Error(ErrorKind::kDetectorUnavailable, "detector closed the connection");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::uint64_t DetectorHandle::detect(const std::string& image_path) {
  std::lock_guard lock(*mu_);
  if (broken_ || read_fd_ < 0) {
    throw Error(ErrorKind::kDetectorUnavailable, "detector connection is not usable");
  }
  if (image_path.find('\n') != std::string::npos) {
    throw Error(ErrorKind::kInvalidArgument, "image path contains a newline");
  }
  send_line("DETECT " + image_path);
  const std::string reply = read_line();
  std::string_view r = trim(reply);
  if (r.substr(0, 6) == "COUNT ") {
    if (auto n = parse_count(trim(r.substr(6)))) return *n;
  } else if (r.substr(0, 4) == "ERR ") {
    throw Error(ErrorKind::kDetectorProtocolError,
                "detector error: " + std::string(r.substr(4)));
  }
  throw Error(ErrorKind::kDetectorProtocolError, "unexpected detector reply '" + reply + "'");
}

StubDetector::StubDetector(Options opts) : opts_(opts), rng_(opts.seed) {}

std::optional<std::string> StubDetector::handle(std::string_view raw) {
  const auto line = trim(raw);
  if (!greeted_) {
    if (line == kDetectorHello) {
      greeted_ = true;
      return std::string(kDetectorReady);
    }
    return "ERR expected handshake '" + std::string(kDetectorHello) + "'";
  }
  if (line.substr(0, 7) != "DETECT ") return "ERR unknown command";
  const std::string path(trim(line.substr(7)));
  if (opts_.delay.count() > 0) std::this_thread::sleep_for(opts_.delay);
  std::uint64_t truth = 0;
  try {
    truth = read_sidecar_count(path);
  } catch (const Error& ex) {
    return "ERR " + std::string(ex.what());
  }
  std::uint64_t kept = truth;
  if (opts_.drop_probability >= 1.0) {
    kept = 0;
  } else if (opts_.drop_probability > 0.0 && truth > 0) {
    std::binomial_distribution<std::uint64_t> keep(truth, 1.0 - opts_.drop_probability);
    kept = keep(rng_);
  }
  return "COUNT " + std::to_string(kept);
}

void StubDetector::serve(int in_fd, int out_fd) {
  std::string buffer;
  char chunk[512];
  while (true) {
    const ssize_t n = ::read(in_fd, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      auto reply = handle(std::string_view(buffer).substr(0, nl));
      buffer.erase(0, nl + 1);
      if (!reply) return;
      *reply += '\n';
      std::size_t off = 0;
      while (off < reply->size()) {
        const ssize_t w = ::write(out_fd, reply->data() + off, reply->size() - off);
        if (w < 0 && errno == EINTR) continue;
        if (w <= 0) return;
        off += static_cast<std::size_t>(w);
      }
    }
  }
}

std::uint64_t read_sidecar_count(const std::filesystem::path& image) {
  auto sidecar = image;
  sidecar += ".count";
  std::ifstream in(sidecar);
  if (!in) throw Error(ErrorKind::kIo, "missing sidecar " + sidecar.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto n = parse_count(trim(text));
  if (!n) throw Error(ErrorKind::kMalformedRecord, "sidecar " + sidecar.string() + " is not a count");
  return *n;
}

void write_sidecar_count(const std::filesystem::path& image, std::uint64_t count) {
  auto sidecar = image;
  sidecar += ".count";
  std::ofstream out(sidecar);
  if (!out) throw Error(ErrorKind::kIo, "cannot write sidecar " + sidecar.string());
  out << count << '\n';
}

}  // namespace edgeroute
