#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "softgrasp/hub/deformation_vector.hpp"
#include "softgrasp/net/socket.hpp"
#include "softgrasp/node/sensor_node.hpp"
#include "softgrasp/util/kv_config.hpp"

namespace softgrasp::hub {

struct HubConfig {
  std::array<net::Endpoint, kSensorCount> endpoints{};
  double poll_timeout_ms = 5.0;
  double connect_timeout_ms = 200.0;
  double reconnect_interval_ms = 100.0;
  double reference_timeout_ms = 500.0;
  double contact_threshold = tactile::kDefaultContactThreshold;
  double stale_after_ms = 2.0 * 1000.0 / 30.0;

  /// Keys: node0..node4 (host:port), poll_timeout_ms, connect_timeout_ms,
  /// reconnect_interval_ms, reference_timeout_ms, contact_threshold, stale_after_ms.
  static HubConfig from_kv(const util::KvConfig& kv);
  static HubConfig load(const std::filesystem::path& path);
  void validate() const;
};

/// SETREF did not succeed on every node.
class ReferenceError : public std::runtime_error {
 public:
  explicit ReferenceError(std::vector<int> failing);
  const std::vector<int>& failing_nodes() const { return failing_; }

 private:
  std::vector<int> failing_;
};

/// Controller-side aggregator over the five sensor nodes.
///
/// Keeps one persistent connection per node.  poll() writes LATEST to every
/// connected node, then waits on all sockets together until each has answered
/// or the poll timeout expires; a node that misses the deadline contributes its
/// last known snapshot, with its age growing.  Down nodes are retried in the
/// background of later polls.  Not thread-safe: one controller at a time.
class SensorHub final : public FeedbackSource {
 public:
  /// Milliseconds, used for snapshot ages.
  using Clock = std::function<double()>;

  explicit SensorHub(HubConfig config, Clock clock = {});

  /// Connects and PINGs every node.  Unreachable nodes leave the hub degraded.
  void connect();

  /// Throws NotReadyError if no node has ever answered.
  DeformationVector poll();
  DeformationVector read() override { return poll(); }

  /// Diagnostic: reads the nodes one after another, each time waiting for a
  /// frame captured after the request (a blocking camera read).
  DeformationVector poll_sequential_fresh(std::chrono::milliseconds per_node_timeout);

  /// Issues SETREF to all five nodes; throws ReferenceError naming the nodes
  /// that are not live or did not acknowledge.
  void set_all_references();

  std::array<bool, kSensorCount> live() const;
  std::size_t live_count() const;
  const HubConfig& config() const { return config_; }

 private:
  enum class LinkState { Down, Connecting, Up };
  struct Link {
    net::Socket socket;
    net::LineBuffer buffer{256};
    LinkState state = LinkState::Down;
    bool live = false;
    bool awaiting_snapshot = false;
    std::chrono::steady_clock::time_point connect_started{};
    std::chrono::steady_clock::time_point next_retry{};
    std::optional<node::SensorSnapshot> last;
    double fresh_at_ms = 0.0;
    std::optional<std::string> control_reply;  // reply to SETREF
  };

  void retry_down_links();
  bool send(std::size_t n, std::string_view request);
  void drop(std::size_t n);
  void handle_line(std::size_t n, const std::string& line);
  /// Services sockets until `done()` or the deadline.
  template <typename Done>
  void pump(std::chrono::steady_clock::time_point deadline, Done done,
            bool send_latest_on_connect);
  DeformationVector assemble() const;

  HubConfig config_;
  Clock clock_;
  std::array<Link, kSensorCount> links_;
};

/// The same aggregation without a transport: reads nodes living in this process.
class InProcessHub final : public FeedbackSource {
 public:
  InProcessHub(std::array<const node::SensorNode*, kSensorCount> nodes, double contact_threshold,
               double stale_after_ms, SensorHub::Clock clock);
  DeformationVector read() override;

 private:
  std::array<const node::SensorNode*, kSensorCount> nodes_;
  double contact_threshold_;
  double stale_after_ms_;
  SensorHub::Clock clock_;
  std::array<std::uint64_t, kSensorCount> last_seq_{};
  std::array<double, kSensorCount> fresh_at_{};
};

}  // namespace softgrasp::hub
