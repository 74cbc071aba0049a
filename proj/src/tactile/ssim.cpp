#include "softgrasp/tactile/ssim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace softgrasp::tactile {

namespace {

// Summed-area table with a zero first row and column: (w + 1) x (h + 1).
class IntegralImage {
 public:
  template <typename F>
  IntegralImage(std::size_t width, std::size_t height, F&& value)
      : stride_(width + 1), sums_((width + 1) * (height + 1), 0.0) {
    for (std::size_t y = 0; y < height; ++y) {
      double row = 0.0;
      for (std::size_t x = 0; x < width; ++x) {
        row += value(y * width + x);
        sums_[(y + 1) * stride_ + (x + 1)] = sums_[y * stride_ + (x + 1)] + row;
      }
    }
  }

  double box(std::size_t x0, std::size_t y0, std::size_t k) const {
    const std::size_t x1 = x0 + k;
    const std::size_t y1 = y0 + k;
    return sums_[y1 * stride_ + x1] - sums_[y0 * stride_ + x1] - sums_[y1 * stride_ + x0] +
           sums_[y0 * stride_ + x0];
  }

 private:
  std::size_t stride_;
  std::vector<double> sums_;
};

}  // namespace

SsimParams SsimParams::for_range(double dynamic_range, int kernel_size) {
  SsimParams p;
  p.kernel_size = kernel_size;
  p.dynamic_range = dynamic_range;
  p.c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  p.c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  return p;
}

void SsimParams::validate() const {
  if (kernel_size < 3 || kernel_size % 2 == 0) {
    throw std::invalid_argument("SSIM kernel size must be odd and >= 3, got " +
                                std::to_string(kernel_size));
  }
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("SSIM constants must be positive");
  if (!(dynamic_range > 0.0)) throw std::invalid_argument("dynamic range must be positive");
}

WindowStats window_stats(std::span<const double> x_window, std::span<const double> y_window,
                         int kernel_size) {
  if (kernel_size <= 0) throw std::invalid_argument("kernel size must be positive");
  const auto n = static_cast<std::size_t>(kernel_size) * static_cast<std::size_t>(kernel_size);
  if (x_window.size() != n || y_window.size() != n) {
    throw std::invalid_argument("window blocks must both be kernel_size x kernel_size");
  }

  WindowStats s;
  for (std::size_t i = 0; i < n; ++i) {
    s.mu_x += x_window[i];
    s.mu_y += y_window[i];
  }
  const double area = static_cast<double>(n);
  s.mu_x /= area;
  s.mu_y /= area;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x_window[i] - s.mu_x;
    const double dy = y_window[i] - s.mu_y;
    s.sigma_x2 += dx * dx;
    s.sigma_y2 += dy * dy;
    s.sigma_xy += dx * dy;
  }
  s.sigma_x2 /= area;
  s.sigma_y2 /= area;
  s.sigma_xy /= area;
  return s;
}

double window_similarity(const WindowStats& s, const SsimParams& p) {
  const double num = (2.0 * s.mu_x * s.mu_y + p.c1) * (2.0 * s.sigma_xy + p.c2);
  const double den =
      (s.mu_x * s.mu_x + s.mu_y * s.mu_y + p.c1) * (s.sigma_x2 + s.sigma_y2 + p.c2);
  return num / den;
}

double ssim(const TactileImage& a, const TactileImage& b, const SsimParams& params) {
  params.validate();
  if (!a.same_shape(b)) throw std::invalid_argument("SSIM inputs differ in shape");
  const auto k = static_cast<std::size_t>(params.kernel_size);
  if (a.width() < k || a.height() < k) {
    throw std::invalid_argument("image smaller than the SSIM kernel");
  }

  const auto pa = a.pixels();
  const auto pb = b.pixels();
  const std::size_t w = a.width();
  const std::size_t h = a.height();

  // Pixel sums over integer-valued frames stay exact in double precision.
  const IntegralImage sum_a(w, h, [&](std::size_t i) { return pa[i]; });
  const IntegralImage sum_b(w, h, [&](std::size_t i) { return pb[i]; });
  const IntegralImage sum_aa(w, h, [&](std::size_t i) { return pa[i] * pa[i]; });
  const IntegralImage sum_bb(w, h, [&](std::size_t i) { return pb[i] * pb[i]; });
  const IntegralImage sum_ab(w, h, [&](std::size_t i) { return pa[i] * pb[i]; });

  const double area = static_cast<double>(k * k);
  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t y = 0; y + k <= h; ++y) {
    for (std::size_t x = 0; x + k <= w; ++x) {
      WindowStats s;
      s.mu_x = sum_a.box(x, y, k) / area;
      s.mu_y = sum_b.box(x, y, k) / area;
      s.sigma_x2 = std::max(0.0, sum_aa.box(x, y, k) / area - s.mu_x * s.mu_x);
      s.sigma_y2 = std::max(0.0, sum_bb.box(x, y, k) / area - s.mu_y * s.mu_y);
      const double bound = std::sqrt(s.sigma_x2 * s.sigma_y2);
      s.sigma_xy = std::clamp(sum_ab.box(x, y, k) / area - s.mu_x * s.mu_y, -bound, bound);
      total += window_similarity(s, params);
      ++windows;
    }
  }
  return std::clamp(total / static_cast<double>(windows), 0.0, 1.0);
}

double deformation(const TactileImage& live, const TactileImage& reference,
                   const SsimParams& params) {
  return 1.0 - ssim(live, reference, params);
}

}  // namespace softgrasp::tactile
