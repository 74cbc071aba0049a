#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "softgrasp/tactile/image.hpp"
#include "softgrasp/tactile/ssim.hpp"
#include "ssim_oracle.hpp"

using namespace softgrasp::tactile;

namespace {

const std::filesystem::path kFixtures = SOFTGRASP_FIXTURE_DIR;

TactileImage random_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_int_distribution<int> dist(0, 255);
  std::vector<double> px(w * h);
  for (auto& v : px) v = dist(rng);
  return TactileImage(w, h, std::move(px));
}

TactileImage noisy_copy(std::mt19937_64& rng, const TactileImage& img, int amp) {
  std::uniform_int_distribution<int> dist(-amp, amp);
  std::vector<double> px(img.pixels().begin(), img.pixels().end());
  for (auto& v : px) v = std::clamp(v + dist(rng), 0.0, 255.0);
  return TactileImage(img.width(), img.height(), std::move(px));
}

oracle::Gray to_gray(const TactileImage& img) {
  return {img.width(), img.height(), {img.pixels().begin(), img.pixels().end()}};
}

}  // namespace

TEST(TactileImage, RejectsBadPixels) {
  EXPECT_THROW(TactileImage(2, 2, std::vector<double>{0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(TactileImage(2, 2, std::vector<double>{0, 1, 2, 256}), std::invalid_argument);
  EXPECT_THROW(TactileImage(2, 2, std::vector<double>{0, -1, 2, 3}), std::invalid_argument);
  TactileImage ok(2, 2, std::vector<double>{0, 1, 2, 255});
  EXPECT_EQ(ok.at(1, 1), 255);
  EXPECT_THROW(ok.set(2, 0, 1), std::out_of_range);
}

TEST(TactileImage, ColourIsAveragedToGray) {
  const std::vector<std::uint8_t> rgb = {30, 60, 90, 255, 255, 255};
  const auto img = TactileImage::from_interleaved(2, 1, 3, rgb);
  EXPECT_DOUBLE_EQ(img.at(0, 0), 60.0);
  EXPECT_DOUBLE_EQ(img.at(1, 0), 255.0);
}

TEST(TactileImage, PgmRoundTrip) {
  std::mt19937_64 rng(5);
  const auto img = random_image(rng, 13, 9);
  const auto path = std::filesystem::temp_directory_path() / "softgrasp_roundtrip.pgm";
  write_pgm(img, path);
  EXPECT_EQ(read_pgm(path), img);
  std::filesystem::remove(path);
}

TEST(TactileImage, ReadPgmRejectsGarbage) {
  const auto path = std::filesystem::temp_directory_path() / "softgrasp_garbage.pgm";
  std::ofstream(path) << "P2\n2 2\n255\n0 0 0 0\n";
  EXPECT_THROW(read_pgm(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(WindowStats, ConstantBlocks) {
  std::vector<double> ten(49, 10.0);
  auto s = window_stats(ten, ten, 7);
  EXPECT_DOUBLE_EQ(s.mu_x, 10.0);
  EXPECT_DOUBLE_EQ(s.mu_y, 10.0);
  EXPECT_DOUBLE_EQ(s.sigma_x2, 0.0);
  EXPECT_DOUBLE_EQ(s.sigma_y2, 0.0);
  EXPECT_DOUBLE_EQ(s.sigma_xy, 0.0);

  std::vector<double> zero(49, 0.0), full(49, 255.0);
  s = window_stats(zero, full, 7);
  EXPECT_DOUBLE_EQ(s.mu_x, 0.0);
  EXPECT_DOUBLE_EQ(s.mu_y, 255.0);
  EXPECT_DOUBLE_EQ(s.sigma_x2, 0.0);
  EXPECT_DOUBLE_EQ(s.sigma_y2, 0.0);
  EXPECT_DOUBLE_EQ(s.sigma_xy, 0.0);
}

TEST(WindowStats, MatchesFixtureBlockPair) {
  std::ifstream in(kFixtures / "window_stats.txt");
  ASSERT_TRUE(in);
  std::string line;
  std::getline(in, line);  // comment
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    rows.push_back(v);
  }
  ASSERT_EQ(rows.size(), 3u);
  ASSERT_EQ(rows[0].size(), 49u);
  const auto s = window_stats(rows[0], rows[1], 7);
  EXPECT_NEAR(s.mu_x, rows[2][0], 1e-12);
  EXPECT_NEAR(s.mu_y, rows[2][1], 1e-12);
  EXPECT_NEAR(s.sigma_x2, rows[2][2], 1e-12 * rows[2][2]);
  EXPECT_NEAR(s.sigma_y2, rows[2][3], 1e-12 * rows[2][3]);
  EXPECT_NEAR(s.sigma_xy, rows[2][4], 1e-12 * std::abs(rows[2][2]));
}

TEST(WindowStats, SizeMismatchThrows) {
  std::vector<double> a(49, 1.0), b(48, 1.0);
  EXPECT_THROW(window_stats(a, b, 7), std::invalid_argument);
  EXPECT_THROW(window_stats(b, b, 7), std::invalid_argument);
}

TEST(WindowStats, CovarianceBoundedByVariances) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(0, 255);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(49), b(49);
    for (auto& v : a) v = d(rng);
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = (i % 2) ? a[j] : d(rng);
    const auto s = window_stats(a, b, 7);
    EXPECT_GE(s.sigma_x2, 0.0);
    EXPECT_GE(s.sigma_y2, 0.0);
    EXPECT_LE(std::abs(s.sigma_xy), std::sqrt(s.sigma_x2 * s.sigma_y2) + 1e-9);
  }
}

TEST(SsimParams, Validation) {
  SsimParams p;
  EXPECT_NO_THROW(p.validate());
  p.kernel_size = 6;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.kernel_size = 1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = SsimParams{};
  p.c1 = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  const auto q = SsimParams::for_range(1.0);
  EXPECT_DOUBLE_EQ(q.c1, 1e-4);
  EXPECT_DOUBLE_EQ(q.c2, 9e-4);
}

TEST(Ssim, ShapeErrors) {
  TactileImage a(8, 8, 0.0), b(8, 9, 0.0), tiny(6, 6, 0.0);
  EXPECT_THROW(ssim(a, b), std::invalid_argument);
  EXPECT_THROW(ssim(tiny, tiny), std::invalid_argument);
  EXPECT_THROW(deformation(a, b), std::invalid_argument);
}

TEST(Ssim, MatchesOracleFixtures) {
  std::ifstream in(kFixtures / "ssim_fixtures.txt");
  ASSERT_TRUE(in);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string pa, pb;
    double expected;
    ss >> pa >> pb >> expected;
    const auto a = read_pgm(kFixtures / pa);
    const auto b = read_pgm(kFixtures / pb);
    EXPECT_NEAR(ssim(a, b), expected, 1e-9) << pa;
    EXPECT_NEAR(deformation(a, b), 1.0 - expected, 1e-9) << pa;
    ++checked;
  }
  EXPECT_GE(checked, 8);
}

TEST(Ssim, BlackAgainstWhiteIsRegulariserDominated) {
  TactileImage black(16, 16, 0.0), white(16, 16, 255.0);
  const SsimParams p;
  const double expected = p.c1 / (255.0 * 255.0 + p.c1);
  EXPECT_NEAR(ssim(black, white), expected, 1e-15);
  EXPECT_GT(ssim(black, white), 0.0);
}

TEST(SsimProperty, OracleEquivalenceOverRandomPairs) {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> size(8, 64);
  for (int i = 0; i < 100; ++i) {
    const auto w = static_cast<std::size_t>(size(rng));
    const auto h = static_cast<std::size_t>(size(rng));
    const auto a = random_image(rng, w, h);
    const auto b = (i % 4 == 0) ? random_image(rng, w, h) : noisy_copy(rng, a, 10 + 20 * (i % 4));
    EXPECT_NEAR(ssim(a, b), oracle::ssim(to_gray(a), to_gray(b)), 1e-9) << w << "x" << h;
  }
}

TEST(SsimProperty, IdentitySymmetryRange) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(7, 48);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_image(rng, size(rng), size(rng));
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
    EXPECT_NEAR(deformation(a, a), 0.0, 1e-12);
    const auto b = (i % 2) ? random_image(rng, a.width(), a.height()) : noisy_copy(rng, a, 50);
    const double s = ssim(a, b);
    EXPECT_NEAR(s, ssim(b, a), 1e-12);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_GE(deformation(a, b), 0.0);
    EXPECT_LE(deformation(a, b), 1.0);
  }
}

TEST(SsimProperty, ConstantImagesAreIdentical) {
  for (double v : {0.0, 17.0, 255.0}) {
    TactileImage img(9, 9, v);
    EXPECT_NEAR(ssim(img, img), 1.0, 1e-12);
  }
}

TEST(Contact, StrictThreshold) {
  EXPECT_TRUE(is_contact(0.06, 0.05));
  EXPECT_FALSE(is_contact(0.05, 0.05));
  EXPECT_FALSE(is_contact(0.0, 0.05));
  EXPECT_FALSE(is_contact(0.0500, kDefaultContactThreshold));
  EXPECT_TRUE(is_contact(0.0501, kDefaultContactThreshold));
}

TEST(Contact, MonotoneInDelta) {
  for (int i = 0; i <= 100; ++i) {
    const double d = i / 100.0;
    for (int j = i; j <= 100; ++j) {
      if (is_contact(d, 0.05)) EXPECT_TRUE(is_contact(j / 100.0, 0.05));
    }
  }
}
