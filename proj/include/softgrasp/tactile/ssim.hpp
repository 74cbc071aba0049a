#pragma once

#include <span>

#include "softgrasp/tactile/image.hpp"

namespace softgrasp::tactile {

/// Parameters of the windowed structural-similarity metric.
struct SsimParams {
  int kernel_size = 7;
  double dynamic_range = 255.0;
  double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  double c2 = (0.03 * 255.0) * (0.03 * 255.0);

  /// Standard constants c1 = (0.01 L)^2, c2 = (0.03 L)^2 for dynamic range L.
  static SsimParams for_range(double dynamic_range, int kernel_size = 7);

  /// Throws std::invalid_argument unless kernel_size is odd and >= 3 and c1, c2 > 0.
  void validate() const;
};

/// Population statistics of one pair of co-located windows.
struct WindowStats {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x2 = 0.0;
  double sigma_y2 = 0.0;
  double sigma_xy = 0.0;
};

/// Means, variances and covariance of two kernel_size x kernel_size blocks
/// (row-major).  Divides by the window area, not area - 1.
WindowStats window_stats(std::span<const double> x_window, std::span<const double> y_window,
                         int kernel_size);

/// The per-window similarity
///   (2 mu_x mu_y + c1)(2 sigma_xy + c2) / ((mu_x^2 + mu_y^2 + c1)(sigma_x^2 + sigma_y^2 + c2)).
double window_similarity(const WindowStats& stats, const SsimParams& params);

/// Mean per-window similarity over every fully contained window (stride 1, no
/// padding), clamped into [0, 1].  Throws std::invalid_argument on a shape
/// mismatch or an image smaller than the kernel.
double ssim(const TactileImage& a, const TactileImage& b, const SsimParams& params = {});

/// Deformation score 1 - ssim(live, reference); 0 for an undeformed sensor.
double deformation(const TactileImage& live, const TactileImage& reference,
                   const SsimParams& params = {});

/// Contact test on a deformation score.  Strict: delta == threshold is not contact.
constexpr bool is_contact(double delta, double threshold) { return delta > threshold; }

inline constexpr double kDefaultContactThreshold = 0.05;

}  // namespace softgrasp::tactile
