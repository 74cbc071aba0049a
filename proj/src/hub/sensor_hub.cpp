#include "softgrasp/hub/sensor_hub.hpp"

#include <poll.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "softgrasp/util/errors.hpp"

namespace softgrasp::hub {

using std::chrono::steady_clock;

namespace {

steady_clock::duration from_ms(double ms) {
  return std::chrono::duration_cast<steady_clock::duration>(
      std::chrono::duration<double, std::milli>(ms));
}

std::string join_ids(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

HubConfig HubConfig::from_kv(const util::KvConfig& kv) {
  std::set<std::string> known = {"poll_timeout_ms",      "connect_timeout_ms",
                                 "reconnect_interval_ms", "reference_timeout_ms",
                                 "contact_threshold",     "stale_after_ms"};
  HubConfig cfg;
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    const std::string key = "node" + std::to_string(n);
    known.insert(key);
    const auto value = kv.get(key);
    if (!value) throw std::invalid_argument("hub config is missing " + key);
    cfg.endpoints[n] = net::Endpoint::parse(*value);
  }
  kv.require_known(known);
  cfg.poll_timeout_ms = kv.get_double("poll_timeout_ms", cfg.poll_timeout_ms);
  cfg.connect_timeout_ms = kv.get_double("connect_timeout_ms", cfg.connect_timeout_ms);
  cfg.reconnect_interval_ms = kv.get_double("reconnect_interval_ms", cfg.reconnect_interval_ms);
  cfg.reference_timeout_ms = kv.get_double("reference_timeout_ms", cfg.reference_timeout_ms);
  cfg.contact_threshold = kv.get_double("contact_threshold", cfg.contact_threshold);
  cfg.stale_after_ms = kv.get_double("stale_after_ms", cfg.stale_after_ms);
  cfg.validate();
  return cfg;
}

HubConfig HubConfig::load(const std::filesystem::path& path) {
  return from_kv(util::KvConfig::load(path));
}

void HubConfig::validate() const {
  if (!(poll_timeout_ms > 0.0)) throw std::invalid_argument("poll timeout must be positive");
  if (!(connect_timeout_ms > 0.0)) throw std::invalid_argument("connect timeout must be positive");
  if (!(contact_threshold > 0.0 && contact_threshold < 1.0)) {
    throw std::invalid_argument("contact threshold must lie in (0, 1)");
  }
  for (const auto& e : endpoints) {
    if (e.port == 0) throw std::invalid_argument("hub endpoint " + e.str() + " has no port");
  }
}

ReferenceError::ReferenceError(std::vector<int> failing)
    : std::runtime_error("SETREF failed on node(s) " + join_ids(failing)),
      failing_(std::move(failing)) {}

SensorHub::SensorHub(HubConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
  config_.validate();
  if (!clock_) {
    const auto start = steady_clock::now();
    clock_ = [start] {
      return std::chrono::duration<double, std::milli>(steady_clock::now() - start).count();
    };
  }
}

void SensorHub::connect() {
  const auto timeout = std::chrono::milliseconds(
      static_cast<long long>(std::ceil(config_.connect_timeout_ms)));
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    Link& link = links_[n];
    link = Link{};
    link.socket = net::connect_tcp(config_.endpoints[n], timeout);
    if (!link.socket.valid()) {
      link.next_retry = steady_clock::now() + from_ms(config_.reconnect_interval_ms);
      continue;
    }
    net::set_nodelay(link.socket.fd());
    const auto reply = net::request_line(link.socket.fd(), "PING\n", link.buffer, timeout);
    if (reply && node::parse_pong(*reply) == static_cast<int>(n)) {
      net::set_nonblocking(link.socket.fd(), true);
      link.state = LinkState::Up;
      link.live = true;
    } else {
      drop(n);
    }
  }
}

void SensorHub::drop(std::size_t n) {
  Link& link = links_[n];
  link.socket.close();
  link.buffer = net::LineBuffer{256};
  link.state = LinkState::Down;
  link.live = false;
  link.awaiting_snapshot = false;
  link.next_retry = steady_clock::now() + from_ms(config_.reconnect_interval_ms);
}

bool SensorHub::send(std::size_t n, std::string_view request) {
  if (!net::send_all(links_[n].socket.fd(), request)) {
    drop(n);
    return false;
  }
  return true;
}

void SensorHub::retry_down_links() {
  const auto now = steady_clock::now();
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    Link& link = links_[n];
    if (link.state == LinkState::Connecting &&
        now - link.connect_started > from_ms(config_.connect_timeout_ms)) {
      drop(n);
    }
    if (link.state != LinkState::Down || now < link.next_retry) continue;
    bool in_progress = false;
    link.socket = net::start_connect(config_.endpoints[n], in_progress);
    if (!link.socket.valid()) {
      link.next_retry = now + from_ms(config_.reconnect_interval_ms);
      continue;
    }
    link.state = in_progress ? LinkState::Connecting : LinkState::Up;
    link.connect_started = now;
  }
}

void SensorHub::handle_line(std::size_t n, const std::string& line) {
  Link& link = links_[n];
  if (line.rfind("SNAP ", 0) == 0) {
    node::SensorSnapshot snap;
    try {
      snap = node::parse_snapshot(line);
    } catch (const ProtocolError&) {
      link.awaiting_snapshot = false;
      return;
    }
    link.awaiting_snapshot = false;
    if (snap.sensor_id != static_cast<int>(n)) return;  // wired to the wrong node
    if (!link.last || snap.seq != link.last->seq) link.fresh_at_ms = clock_();
    link.last = snap;
    link.live = true;
  } else if (node::parse_pong(line)) {
    link.live = true;
  } else if (line == node::kOk || line == node::kErrNotReady) {
    link.control_reply = line;
  } else if (line == node::kErrBadRequest) {
    link.awaiting_snapshot = false;
  }
}

template <typename Done>
void SensorHub::pump(steady_clock::time_point deadline, Done done, bool send_latest_on_connect) {
  std::vector<pollfd> fds;
  std::vector<std::size_t> owners;
  for (;;) {
    if (done()) return;
    const auto now = steady_clock::now();
    if (now >= deadline) return;

    fds.clear();
    owners.clear();
    for (std::size_t n = 0; n < kSensorCount; ++n) {
      const Link& link = links_[n];
      if (link.state == LinkState::Connecting) {
        fds.push_back({link.socket.fd(), POLLOUT, 0});
      } else if (link.state == LinkState::Up) {
        fds.push_back({link.socket.fd(), POLLIN, 0});
      } else {
        continue;
      }
      owners.push_back(n);
    }
    if (fds.empty()) return;

    const auto left = std::chrono::duration_cast<std::chrono::nanoseconds>(deadline - now);
    timespec ts{static_cast<time_t>(left.count() / 1'000'000'000),
                static_cast<long>(left.count() % 1'000'000'000)};
    const int rc = ::ppoll(fds.data(), fds.size(), &ts, nullptr);
    if (rc < 0 && errno != EINTR) return;
    if (rc <= 0) continue;

    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].revents == 0) continue;
      const std::size_t n = owners[i];
      Link& link = links_[n];
      if (link.state == LinkState::Connecting) {
        if (!net::connect_succeeded(link.socket)) {
          drop(n);
          continue;
        }
        link.state = LinkState::Up;
        if (send_latest_on_connect && send(n, "LATEST\n")) link.awaiting_snapshot = true;
        continue;
      }
      const bool open = net::read_into(link.socket.fd(), link.buffer);
      while (auto line = link.buffer.next_line()) handle_line(n, *line);
      if (!open) drop(n);
    }
  }
}

DeformationVector SensorHub::assemble() const {
  std::array<std::optional<node::SensorSnapshot>, kSensorCount> snaps;
  std::array<double, kSensorCount> ages{};
  const double now = clock_();
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    snaps[n] = links_[n].last;
    ages[n] = std::max(0.0, now - links_[n].fresh_at_ms);
  }
  return assemble_vector(snaps, ages, config_.contact_threshold, config_.stale_after_ms);
}

DeformationVector SensorHub::poll() {
  const auto deadline = steady_clock::now() + from_ms(config_.poll_timeout_ms);
  retry_down_links();
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    Link& link = links_[n];
    if (link.state == LinkState::Up && !link.awaiting_snapshot) {
      if (send(n, "LATEST\n")) link.awaiting_snapshot = true;
    }
  }
  pump(
      deadline,
      [this] {
        return std::none_of(links_.begin(), links_.end(), [](const Link& l) {
          return l.state == LinkState::Connecting ||
                 (l.state == LinkState::Up && l.awaiting_snapshot);
        });
      },
      true);

  if (std::none_of(links_.begin(), links_.end(), [](const Link& l) { return l.last; })) {
    throw NotReadyError("no sensor node has answered yet");
  }
  return assemble();
}

DeformationVector SensorHub::poll_sequential_fresh(std::chrono::milliseconds per_node_timeout) {
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    if (links_[n].state != LinkState::Up) continue;
    const auto deadline = steady_clock::now() + per_node_timeout;
    std::optional<std::uint64_t> start_seq;
    while (links_[n].state == LinkState::Up && steady_clock::now() < deadline) {
      if (!links_[n].awaiting_snapshot) {
        if (!send(n, "LATEST\n")) break;
        links_[n].awaiting_snapshot = true;
      }
      pump(deadline, [&] { return !links_[n].awaiting_snapshot; }, false);
      if (!links_[n].last) continue;
      if (!start_seq) {
        start_seq = links_[n].last->seq;
      } else if (links_[n].last->seq > *start_seq) {
        break;
      }
      std::this_thread::sleep_for(std::chrono::microseconds(500));
    }
  }
  if (std::none_of(links_.begin(), links_.end(), [](const Link& l) { return l.last; })) {
    throw NotReadyError("no sensor node has answered yet");
  }
  return assemble();
}

void SensorHub::set_all_references() {
  std::vector<int> failing;
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    if (links_[n].state != LinkState::Up || !links_[n].live) failing.push_back(static_cast<int>(n));
  }
  if (!failing.empty()) throw ReferenceError(failing);

  for (std::size_t n = 0; n < kSensorCount; ++n) {
    links_[n].control_reply.reset();
    if (!send(n, "SETREF\n")) failing.push_back(static_cast<int>(n));
  }
  const auto deadline = steady_clock::now() + from_ms(config_.reference_timeout_ms);
  pump(
      deadline,
      [this] {
        return std::all_of(links_.begin(), links_.end(), [](const Link& l) {
          return l.state != LinkState::Up || l.control_reply.has_value();
        });
      },
      false);
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    const bool ok = links_[n].control_reply && *links_[n].control_reply == node::kOk;
    if (!ok && std::find(failing.begin(), failing.end(), static_cast<int>(n)) == failing.end()) {
      failing.push_back(static_cast<int>(n));
    }
  }
  if (!failing.empty()) throw ReferenceError(failing);
}

std::array<bool, kSensorCount> SensorHub::live() const {
  std::array<bool, kSensorCount> out{};
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    out[n] = links_[n].state == LinkState::Up && links_[n].live;
  }
  return out;
}

std::size_t SensorHub::live_count() const {
  const auto l = live();
  return static_cast<std::size_t>(std::count(l.begin(), l.end(), true));
}

InProcessHub::InProcessHub(std::array<const node::SensorNode*, kSensorCount> nodes,
                           double contact_threshold, double stale_after_ms,
                           SensorHub::Clock clock)
    : nodes_(nodes),
      contact_threshold_(contact_threshold),
      stale_after_ms_(stale_after_ms),
      clock_(std::move(clock)) {
  for (const auto* n : nodes_) {
    if (n == nullptr) throw std::invalid_argument("in-process hub needs five nodes");
  }
  if (!clock_) throw std::invalid_argument("in-process hub needs a clock");
}

DeformationVector InProcessHub::read() {
  std::array<std::optional<node::SensorSnapshot>, kSensorCount> snaps;
  std::array<double, kSensorCount> ages{};
  const double now = clock_();
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    snaps[n] = nodes_[n]->latest();
    if (snaps[n]->seq != last_seq_[n]) {
      last_seq_[n] = snaps[n]->seq;
      fresh_at_[n] = now;
    }
    ages[n] = std::max(0.0, now - fresh_at_[n]);
  }
  return assemble_vector(snaps, ages, contact_threshold_, stale_after_ms_);
}

}  // namespace softgrasp::hub
