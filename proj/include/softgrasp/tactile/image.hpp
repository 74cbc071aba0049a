#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace softgrasp::tactile {

/// Single-channel tactile frame, row-major, intensities in [0, dynamic_range].
///
/// Both live frames and undeformed reference frames use this type.  Colour
/// input is reduced to one channel by unweighted channel averaging before it
/// gets here (see from_interleaved).
class TactileImage {
 public:
  TactileImage() = default;
  TactileImage(std::size_t width, std::size_t height, double fill = 0.0,
               double dynamic_range = 255.0);
  TactileImage(std::size_t width, std::size_t height, std::vector<double> pixels,
               double dynamic_range = 255.0);

  /// Averages `channels` interleaved 8-bit channels into one grayscale plane.
  static TactileImage from_interleaved(std::size_t width, std::size_t height,
                                       std::size_t channels,
                                       std::span<const std::uint8_t> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }
  double dynamic_range() const { return dynamic_range_; }

  double at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  /// Throws std::out_of_range for coordinates or values outside the image/range.
  void set(std::size_t x, std::size_t y, double value);

  std::span<const double> pixels() const { return pixels_; }

  bool same_shape(const TactileImage& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const TactileImage&, const TactileImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double dynamic_range_ = 255.0;
  std::vector<double> pixels_;
};

/// Reads binary PGM (P5, 8-bit).  Binary PPM (P6) is accepted and averaged to gray.
TactileImage read_pgm(const std::filesystem::path& path);

/// Writes binary PGM (P5, 8-bit); intensities are rounded and clamped to [0, 255].
void write_pgm(const TactileImage& image, const std::filesystem::path& path);

}  // namespace softgrasp::tactile
