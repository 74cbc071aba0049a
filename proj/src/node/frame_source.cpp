#include "softgrasp/node/frame_source.hpp"

#include <algorithm>
#include <stdexcept>

namespace softgrasp::node {

ReplayFrameSource::ReplayFrameSource(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw std::invalid_argument("replay directory does not exist: " + directory.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      files_.push_back(entry.path());
    }
  }
  std::sort(files_.begin(), files_.end());
}

std::optional<tactile::TactileImage> ReplayFrameSource::next_frame() {
  if (next_ >= files_.size()) return std::nullopt;
  return tactile::read_pgm(files_[next_++]);
}

}  // namespace softgrasp::node
