#include "softgrasp/node/sensor_node.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <stdexcept>
#include <system_error>
#include <vector>

#include "softgrasp/util/errors.hpp"

namespace softgrasp::node {

using namespace std::chrono_literals;

void NodeConfig::validate() const {
  if (sensor_id < 0) throw std::invalid_argument("sensor id must be non-negative");
  if (!(capture_period_ms > 0.0)) throw std::invalid_argument("capture period must be positive");
  if (!(contact_threshold > 0.0 && contact_threshold < 1.0)) {
    throw std::invalid_argument("contact threshold must lie in (0, 1)");
  }
  ssim.validate();
}

SensorNode::SensorNode(NodeConfig config, std::unique_ptr<FrameSource> source, Clock clock)
    : config_(std::move(config)), source_(std::move(source)), clock_(std::move(clock)) {
  config_.validate();
  if (!source_) throw std::invalid_argument("sensor node needs a frame source");
  if (!clock_) {
    const auto start = std::chrono::steady_clock::now();
    clock_ = [start] {
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
    };
  }
  SensorSnapshot initial;
  initial.sensor_id = config_.sensor_id;
  published_.publish(initial);
}

SensorNode::~SensorNode() { stop(); }

void SensorNode::start(bool capture_loop) {
  if (running()) return;
  listener_ = net::listen_tcp(config_.listen);
  bound_ = config_.listen;
  bound_.port = net::local_port(listener_);

  int fds[2];
  if (::pipe(fds) != 0) throw std::system_error(errno, std::generic_category(), "pipe");
  wake_read_ = fds[0];
  wake_write_ = fds[1];

  serve_thread_ = std::jthread([this](std::stop_token st) { serve_loop(st); });
  if (capture_loop) {
    capture_thread_ = std::jthread([this](std::stop_token st) { this->capture_loop(st); });
  }
}

void SensorNode::stop() {
  if (capture_thread_.joinable()) {
    capture_thread_.request_stop();
    capture_thread_.join();
  }
  if (serve_thread_.joinable()) {
    serve_thread_.request_stop();
    const char byte = 'x';
    [[maybe_unused]] const auto n = ::write(wake_write_, &byte, 1);
    serve_thread_.join();
  }
  if (wake_read_ >= 0) ::close(wake_read_);
  if (wake_write_ >= 0) ::close(wake_write_);
  wake_read_ = wake_write_ = -1;
  listener_.close();
}

bool SensorNode::capture_once() {
  auto frame = source_->next_frame();
  if (!frame) return false;
  process_frame(*frame);
  return true;
}

SensorSnapshot SensorNode::process_frame(const tactile::TactileImage& frame) {
  std::lock_guard writer(process_mutex_);

  std::shared_ptr<const tactile::TactileImage> reference;
  {
    std::lock_guard lock(frame_mutex_);
    reference = reference_;
  }

  double delta = 0.0;
  if (reference) {
    try {
      delta = tactile::deformation(frame, *reference, config_.ssim);
    } catch (const std::invalid_argument&) {
      ++errors_;
      return published_.load();
    }
  }

  auto stored = std::make_shared<const tactile::TactileImage>(frame);
  {
    std::lock_guard lock(frame_mutex_);
    current_ = std::move(stored);
  }

  SensorSnapshot snap;
  snap.sensor_id = config_.sensor_id;
  snap.seq = ++seq_;
  const double now = clock_();
  snap.timestamp_ms = now > 0.0 ? static_cast<std::uint64_t>(now) : 0;
  snap.delta = delta;
  snap.contact = tactile::is_contact(delta, config_.contact_threshold);
  snap.reference_set = static_cast<bool>(reference);
  published_.publish(snap);
  return snap;
}

void SensorNode::capture_reference() {
  std::lock_guard lock(frame_mutex_);
  if (!current_) throw NotReadyError("no frame captured yet");
  reference_ = current_;
}

std::string SensorNode::handle_request(std::string_view line) {
  const auto request = parse_request(line);
  if (!request) return std::string(kErrBadRequest);
  switch (*request) {
    case Request::Latest:
      return format_snapshot(latest());
    case Request::SetRef:
      try {
        capture_reference();
        return std::string(kOk);
      } catch (const NotReadyError&) {
        return std::string(kErrNotReady);
      }
    case Request::Ping:
      return "PONG " + std::to_string(config_.sensor_id);
  }
  return std::string(kErrBadRequest);
}

void SensorNode::capture_loop(std::stop_token stop) {
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double, std::milli>(config_.capture_period_ms));
  auto next = std::chrono::steady_clock::now();
  while (!stop.stop_requested()) {
    try {
      capture_once();
    } catch (const std::exception&) {
      ++errors_;  // unreadable frame: keep the previous snapshot published
    }
    next += period;
    const auto now = std::chrono::steady_clock::now();
    if (next < now) next = now;  // fell behind; do not burst to catch up
    while (!stop.stop_requested() && std::chrono::steady_clock::now() < next) {
      std::this_thread::sleep_until(std::min(next, std::chrono::steady_clock::now() + 20ms));
    }
  }
}

void SensorNode::serve_loop(std::stop_token stop) {
  struct Client {
    net::Socket socket;
    net::LineBuffer buffer{256};
  };
  std::vector<Client> clients;

  while (!stop.stop_requested()) {
    std::vector<pollfd> fds;
    fds.push_back({wake_read_, POLLIN, 0});
    fds.push_back({listener_.fd(), POLLIN, 0});
    for (const auto& c : clients) fds.push_back({c.socket.fd(), POLLIN, 0});

    if (::poll(fds.data(), fds.size(), 200) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (fds[0].revents & POLLIN) break;

    if (fds[1].revents & POLLIN) {
      const int fd = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
      if (fd >= 0) {
        net::set_nodelay(fd);
        clients.push_back(Client{net::Socket(fd)});
      }
    }

    // fds[2 + i] corresponds to clients[i] as they were before any accept above.
    std::vector<std::size_t> dead;
    for (std::size_t i = 0; i + 2 < fds.size(); ++i) {
      if (fds[i + 2].revents == 0) continue;
      Client& client = clients[i];
      const bool open = net::read_into(client.socket.fd(), client.buffer);
      std::string replies;
      if (client.buffer.take_overflow()) {
        replies += kErrBadRequest;
        replies += '\n';
      }
      while (auto line = client.buffer.next_line()) {
        replies += handle_request(*line);
        replies += '\n';
      }
      if (!replies.empty() && !net::send_all(client.socket.fd(), replies)) {
        dead.push_back(i);
        continue;
      }
      if (!open) dead.push_back(i);
    }
    for (auto it = dead.rbegin(); it != dead.rend(); ++it) {
      clients.erase(clients.begin() + static_cast<std::ptrdiff_t>(*it));
    }
  }
}

}  // namespace softgrasp::node
