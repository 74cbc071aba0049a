#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace softgrasp::net {

/// host:port pair.  Hosts are resolved as IPv4.
struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// Parses "host:port"; throws std::invalid_argument when malformed.
  static Endpoint parse(std::string_view text);
  std::string str() const { return host + ":" + std::to_string(port); }

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// Owning file descriptor for a socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void close();

 private:
  int fd_ = -1;
};

/// Binds and listens; port 0 selects an ephemeral port.  Throws std::system_error.
Socket listen_tcp(const Endpoint& endpoint, int backlog = 16);

/// Port a bound socket is listening on.
std::uint16_t local_port(const Socket& socket);

/// Blocking connect with timeout.  Returns an empty socket on failure.
Socket connect_tcp(const Endpoint& endpoint, std::chrono::milliseconds timeout);

/// Starts a non-blocking connect.  `in_progress` is set when completion must be
/// awaited with POLLOUT; an invalid socket means immediate failure.
Socket start_connect(const Endpoint& endpoint, bool& in_progress);

/// Result of a pending non-blocking connect (SO_ERROR == 0).
bool connect_succeeded(const Socket& socket);

void set_nonblocking(int fd, bool on);
void set_nodelay(int fd);

/// Writes the whole buffer (retrying on EINTR/EAGAIN).  False if the peer is gone.
bool send_all(int fd, std::string_view data);

/// Accumulates bytes from a stream and splits them into '\n'-terminated lines.
/// A trailing '\r' is stripped.  Lines longer than max_line are reported as
/// overflow and discarded.
class LineBuffer {
 public:
  explicit LineBuffer(std::size_t max_line = 1024) : max_line_(max_line) {}

  void append(std::string_view bytes);
  /// Next complete line, or nullopt when none is buffered.
  std::optional<std::string> next_line();
  /// True (once) if an over-long line was dropped since the last call.
  bool take_overflow();

 private:
  std::size_t max_line_;
  std::string buffer_;
  bool overflow_ = false;
  bool discarding_ = false;
};

/// Reads available bytes into `buffer`.  Returns false on EOF or a hard error.
bool read_into(int fd, LineBuffer& buffer);

/// Sends `request` and waits for one reply line (blocking, for tools and tests).
std::optional<std::string> request_line(int fd, std::string_view request, LineBuffer& buffer,
                                        std::chrono::milliseconds timeout);

}  // namespace softgrasp::net
