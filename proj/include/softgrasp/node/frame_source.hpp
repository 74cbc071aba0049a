#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "softgrasp/tactile/image.hpp"

namespace softgrasp::node {

/// Where a sensor node gets its camera frames from.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  /// The next frame, or nullopt when none is available (yet, or any more).
  virtual std::optional<tactile::TactileImage> next_frame() = 0;
};

/// Frames produced by a callable, e.g. a simulated fingertip camera.
class CallbackFrameSource final : public FrameSource {
 public:
  using Producer = std::function<std::optional<tactile::TactileImage>()>;
  explicit CallbackFrameSource(Producer producer) : producer_(std::move(producer)) {}
  std::optional<tactile::TactileImage> next_frame() override { return producer_(); }

 private:
  Producer producer_;
};

/// Replays every *.pgm file of a directory once, in lexicographic filename order.
class ReplayFrameSource final : public FrameSource {
 public:
  explicit ReplayFrameSource(const std::filesystem::path& directory);
  std::optional<tactile::TactileImage> next_frame() override;

  std::size_t frame_count() const { return files_.size(); }

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t next_ = 0;
};

}  // namespace softgrasp::node
