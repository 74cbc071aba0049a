#include "softgrasp/tactile/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace softgrasp::tactile {

namespace {

void check_range(std::span<const double> pixels, double dynamic_range) {
  for (double p : pixels) {
    if (!(p >= 0.0 && p <= dynamic_range)) {
      throw std::invalid_argument("pixel intensity " + std::to_string(p) + " outside [0, " +
                                  std::to_string(dynamic_range) + "]");
    }
  }
}

// Skips whitespace and '#' comments between PNM header tokens.
std::size_t read_header_int(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  std::size_t value = 0;
  if (!(in >> value)) throw std::runtime_error("malformed PNM header");
  return value;
}

}  // namespace

TactileImage::TactileImage(std::size_t width, std::size_t height, double fill,
                           double dynamic_range)
    : TactileImage(width, height, std::vector<double>(width * height, fill), dynamic_range) {}

TactileImage::TactileImage(std::size_t width, std::size_t height, std::vector<double> pixels,
                           double dynamic_range)
    : width_(width), height_(height), dynamic_range_(dynamic_range), pixels_(std::move(pixels)) {
  if (!(dynamic_range_ > 0.0)) throw std::invalid_argument("dynamic range must be positive");
  if (pixels_.size() != width_ * height_) {
    throw std::invalid_argument("pixel count does not equal width x height");
  }
  check_range(pixels_, dynamic_range_);
}

TactileImage TactileImage::from_interleaved(std::size_t width, std::size_t height,
                                            std::size_t channels,
                                            std::span<const std::uint8_t> data) {
  if (channels == 0) throw std::invalid_argument("channel count must be positive");
  if (data.size() != width * height * channels) {
    throw std::invalid_argument("interleaved buffer size does not match dimensions");
  }
  std::vector<double> gray(width * height);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) sum += data[i * channels + c];
    gray[i] = sum / static_cast<double>(channels);
  }
  return TactileImage(width, height, std::move(gray), 255.0);
}

void TactileImage::set(std::size_t x, std::size_t y, double value) {
  if (x >= width_ || y >= height_) throw std::out_of_range("pixel coordinate outside image");
  if (!(value >= 0.0 && value <= dynamic_range_)) {
    throw std::out_of_range("pixel intensity outside dynamic range");
  }
  pixels_[y * width_ + x] = value;
}

TactileImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  std::size_t channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw std::runtime_error(path.string() + ": not a binary PGM/PPM file");
  }

  const std::size_t width = read_header_int(in);
  const std::size_t height = read_header_int(in);
  const std::size_t maxval = read_header_int(in);
  if (maxval == 0 || maxval > 255) {
    throw std::runtime_error(path.string() + ": only 8-bit PNM files are supported");
  }
  in.get();  // single whitespace byte before the raster

  std::vector<std::uint8_t> raster(width * height * channels);
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) {
    throw std::runtime_error(path.string() + ": truncated raster");
  }
  return TactileImage::from_interleaved(width, height, channels, raster);
}

void write_pgm(const TactileImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<char> raster(image.size());
  const auto pixels = image.pixels();
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double v = std::clamp(std::round(pixels[i]), 0.0, 255.0);
    raster[i] = static_cast<char>(static_cast<std::uint8_t>(v));
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

}  // namespace softgrasp::tactile
