#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "softgrasp/net/socket.hpp"
#include "softgrasp/node/frame_source.hpp"
#include "softgrasp/node/latest_value.hpp"
#include "softgrasp/node/snapshot.hpp"
#include "softgrasp/tactile/ssim.hpp"

namespace softgrasp::node {

enum class FrameSourceKind { Simulated, Replay };

struct NodeConfig {
  int sensor_id = 0;
  net::Endpoint listen{"127.0.0.1", 0};
  double capture_period_ms = 1000.0 / 30.0;
  tactile::SsimParams ssim{};
  double contact_threshold = tactile::kDefaultContactThreshold;
  FrameSourceKind frame_source = FrameSourceKind::Simulated;

  /// Throws std::invalid_argument on a non-positive period or a threshold outside (0, 1).
  void validate() const;
};

/// One fingertip's acquisition service.
///
/// A capture activity pulls frames from the FrameSource every capture period,
/// scores them against the stored reference and publishes the result; the
/// request activity answers the line protocol from the published snapshot
/// only.  The two share nothing but the LatestValue slot (and a short lock
/// for SETREF), so a LATEST request never waits on a capture in progress.
class SensorNode {
 public:
  /// Milliseconds since node start.
  using Clock = std::function<double()>;

  SensorNode(NodeConfig config, std::unique_ptr<FrameSource> source, Clock clock = {});
  ~SensorNode();
  SensorNode(const SensorNode&) = delete;
  SensorNode& operator=(const SensorNode&) = delete;

  /// Binds the listen endpoint and starts request handling.  With
  /// `capture_loop` false, frames are only taken when capture_once() is called
  /// (lock-step simulation).  Throws std::system_error if the bind fails.
  void start(bool capture_loop = true);
  void stop();
  bool running() const { return serve_thread_.joinable(); }

  /// Bound endpoint (with the ephemeral port resolved) once started.
  net::Endpoint endpoint() const { return bound_; }
  const NodeConfig& config() const { return config_; }

  /// Pulls one frame from the source and processes it.  False if no frame was available.
  bool capture_once();

  /// Scores `frame` against the reference and publishes the snapshot.  A frame
  /// that cannot be scored (shape mismatch) is dropped: the error counter is
  /// incremented and the previously published snapshot is returned unchanged.
  SensorSnapshot process_frame(const tactile::TactileImage& frame);

  /// Stores the most recent frame as the undeformed reference.  Throws
  /// NotReadyError if no frame has been captured yet.
  void capture_reference();

  SensorSnapshot latest() const { return published_.load(); }
  std::uint64_t error_count() const { return errors_.load(); }

  /// Protocol dispatch for one request line; returns the reply without newline.
  std::string handle_request(std::string_view line);

 private:
  void capture_loop(std::stop_token stop);
  void serve_loop(std::stop_token stop);

  NodeConfig config_;
  std::unique_ptr<FrameSource> source_;
  Clock clock_;

  std::mutex process_mutex_;  // serialises writers (capture loop, capture_once callers)
  std::mutex frame_mutex_;    // guards reference_ and current_
  std::shared_ptr<const tactile::TactileImage> reference_;
  std::shared_ptr<const tactile::TactileImage> current_;
  std::uint64_t seq_ = 0;

  LatestValue<SensorSnapshot> published_;
  std::atomic<std::uint64_t> errors_{0};

  net::Socket listener_;
  net::Endpoint bound_;
  int wake_read_ = -1;
  int wake_write_ = -1;
  std::jthread capture_thread_;
  std::jthread serve_thread_;
};

}  // namespace softgrasp::node
