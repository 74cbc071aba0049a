#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "softgrasp/handover/pose.hpp"
#include "softgrasp/handover/scoring.hpp"
#include "softgrasp/util/rng.hpp"
#include "test_support.hpp"

using namespace softgrasp;
using namespace softgrasp::handover;
using testing_support::kData;

namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;

// Plain-array homogeneous transforms, independent of Eigen.
Mat4 to_array(const Pose& p) {
  Mat4 m{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[r][c] = p.rotation(r, c);
    m[r][3] = p.translation(r);
  }
  m[3] = {0, 0, 0, 1};
  return m;
}

Mat4 multiply(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (int k = 0; k < 4; ++k) out[r][c] += a[r][k] * b[k][c];
  return out;
}

Pose random_pose(util::Rng& rng) {
  // Unit quaternion from three uniforms (Shoemake).
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(2 * std::numbers::pi * u2), x = a * std::cos(2 * std::numbers::pi * u2);
  const double y = b * std::sin(2 * std::numbers::pi * u3), z = b * std::cos(2 * std::numbers::pi * u3);
  Pose p;
  p.rotation << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
      2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
      2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  p.translation << rng.uniform(-1000, 1000), rng.uniform(-1000, 1000), rng.uniform(-1000, 1000);
  return p;
}

Pose rot_x(double angle, Eigen::Vector3d t = Eigen::Vector3d::Zero()) {
  Pose p;
  p.rotation = Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitX()).toRotationMatrix();
  p.translation = t;
  return p;
}

Pose translate(double x, double y, double z) {
  Pose p;
  p.translation << x, y, z;
  return p;
}

}  // namespace

TEST(Pose, ComposeExamples) {
  const auto c = compose(translate(1, 2, 3), translate(10, 20, 30));
  EXPECT_TRUE(c.translation.isApprox(Eigen::Vector3d(11, 22, 33)));
  const auto r = compose(rot_x(std::numbers::pi / 2), translate(0, 1, 0));
  EXPECT_NEAR(r.translation.x(), 0, 1e-12);
  EXPECT_NEAR(r.translation.y(), 0, 1e-12);
  EXPECT_NEAR(r.translation.z(), 1, 1e-12);
  const auto id = compose(Pose::identity(), r);
  EXPECT_TRUE(id.matrix().isApprox(r.matrix()));
}

TEST(Pose, ValidationRejectsNonRigid) {
  Pose p;
  p.rotation(0, 0) = 2;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_THROW(compose(p, Pose::identity()), std::invalid_argument);
  Pose mirror;
  mirror.rotation(2, 2) = -1;
  EXPECT_THROW(mirror.validate(), std::invalid_argument);
  Pose nan;
  nan.translation.x() = std::nan("");
  EXPECT_THROW(nan.validate(), std::invalid_argument);
  Eigen::Matrix4d bad_row = Eigen::Matrix4d::Identity();
  bad_row(3, 0) = 1;
  EXPECT_THROW(Pose::from_matrix(bad_row), std::invalid_argument);
}

TEST(PoseProperty, ComposeMatchesPlainMatrixProduct) {
  util::Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_pose(rng);
    const auto b = random_pose(rng);
    const auto got = to_array(compose(a, b));
    const auto want = multiply(to_array(a), to_array(b));
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(got[r][c], want[r][c], 1e-12);
      EXPECT_NEAR(got[r][3], want[r][3], 1e-9);
    }
  }
}

TEST(PoseProperty, AssociativeAndInvertible) {
  util::Rng rng(32);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const auto left = compose(compose(a, b), c).matrix();
    const auto right = compose(a, compose(b, c)).matrix();
    EXPECT_LT((left - right).cwiseAbs().maxCoeff(), 1e-9);
    const auto round = compose(a, inverse(a)).matrix();
    EXPECT_LT((round - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Offset, Examples) {
  const auto o = offset_pose(Pose::identity(), {-40, 60});
  EXPECT_TRUE(o.translation.isApprox(Eigen::Vector3d(0, -40, 60)));
  const auto z_only = offset_pose(Pose::identity(), {-40, 60}, OffsetAxes::ZOnly);
  EXPECT_TRUE(z_only.translation.isApprox(Eigen::Vector3d(0, 0, 60)));
  // 90 degrees about x maps marker y to camera z and marker z to camera -y.
  const auto turned = offset_pose(rot_x(std::numbers::pi / 2, {5, 5, 5}), {10, 20});
  EXPECT_NEAR(turned.translation.x(), 5, 1e-12);
  EXPECT_NEAR(turned.translation.y(), 5 - 20, 1e-12);
  EXPECT_NEAR(turned.translation.z(), 5 + 10, 1e-12);
}

TEST(SolveGoal, Examples) {
  const PlanarOffset none{};
  const auto same = solve_goal(translate(1, 2, 3), translate(1, 2, 3), none, none);
  EXPECT_EQ(same, Eigen::Vector3d::Zero());
  const auto along_x = solve_goal(translate(0, 0, 0), translate(100, 0, 0), none, none);
  EXPECT_TRUE(along_x.isApprox(Eigen::Vector3d(100, 0, 0)));
  // The glove's lateral offset is ignored.
  const auto glove = solve_goal(Pose::identity(), Pose::identity(), none, {30, 50});
  EXPECT_TRUE(glove.isApprox(Eigen::Vector3d(0, 0, 50)));
  const auto wrist = solve_goal(Pose::identity(), Pose::identity(), {-40, 60}, none);
  EXPECT_TRUE(wrist.isApprox(Eigen::Vector3d(0, 40, -60)));
}

TEST(SolveGoalProperty, CameraFrameInvariance) {
  util::Rng rng(33);
  for (int i = 0; i < 100; ++i) {
    const auto wrist = random_pose(rng), glove = random_pose(rng), camera = random_pose(rng);
    const PlanarOffset wo{rng.uniform(-80, 80), rng.uniform(-80, 80)};
    const PlanarOffset go{rng.uniform(-80, 80), rng.uniform(-80, 80)};
    const auto base = solve_goal(wrist, glove, wo, go);
    const auto moved = solve_goal(compose(camera, wrist), compose(camera, glove), wo, go);
    EXPECT_LT((moved - camera.rotation * base).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(moved.norm(), base.norm(), 1e-9);
  }
}

TEST(PoseFile, ShippedPairsAndRoundTrip) {
  const auto poses = load_poses(kData / "handover_poses.txt");
  ASSERT_GE(poses.size(), 2u);
  EXPECT_EQ(poses.size() % 2, 0u);
  const auto path = std::filesystem::temp_directory_path() / "softgrasp_poses.txt";
  save_poses(poses, path);
  const auto back = load_poses(path);
  ASSERT_EQ(back.size(), poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_LT((back[i].matrix() - poses[i].matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
  std::ofstream(path) << "1 0 0 0 1 0 0 0 1 1 2\n";
  EXPECT_THROW(load_poses(path), std::runtime_error);
  std::ofstream(path) << "2 0 0 0 1 0 0 0 1 1 2 3\n";
  EXPECT_ANY_THROW(load_poses(path));
  std::filesystem::remove(path);
}

TEST(Scoring, Outcomes) {
  using E = TrialEvent;
  auto score = [](std::vector<TimedEvent> e) { return score_trial(e).value; };
  EXPECT_EQ(score({{1.0, E::Settled}, {4.0, E::ReleasedInBin}}), 1.0);
  EXPECT_EQ(score({{1.0, E::Settled}, {2.0, E::Slip}, {4.0, E::ReleasedInBin}}), 0.5);
  EXPECT_EQ(score({{1.0, E::Settled}, {2.0, E::Slip}, {3.0, E::ObjectLost}}), 0.0);
  EXPECT_EQ(score({{1.0, E::Settled}, {3.0, E::ObjectLost}}), 0.0);
  EXPECT_EQ(score({{8.0, E::Timeout}}), 0.0);
  EXPECT_EQ(score({{4.0, E::ReleasedInBin}}), 0.0);  // never stabilised
  EXPECT_EQ(score_trial({{1.0, E::Settled}, {4.0, E::ReleasedInBin}}).outcome, Outcome::Success);
  EXPECT_EQ(score_trial({{1.0, E::Settled}, {2.0, E::Slip}, {4.0, E::ReleasedInBin}}).outcome,
            Outcome::Partial);
  // Events after the first terminal event do not count.
  EXPECT_EQ(score({{1.0, E::Settled}, {4.0, E::ReleasedInBin}, {5.0, E::Slip}}), 1.0);
}

TEST(Scoring, IncompleteLogThrows) {
  EXPECT_THROW(score_trial({}), std::invalid_argument);
  EXPECT_THROW(score_trial({{1.0, TrialEvent::Settled}, {2.0, TrialEvent::Slip}}),
               std::invalid_argument);
  EXPECT_THROW(parse_trial_event("dropped"), std::invalid_argument);
  EXPECT_EQ(parse_trial_event("released_in_bin"), TrialEvent::ReleasedInBin);
  EXPECT_EQ(to_string(TrialEvent::ObjectLost), "object_lost");
}

TEST(Scoring, EventLogRoundTrip) {
  const std::vector<TimedEvent> events{{0.5, TrialEvent::Settled},
                                       {1.25, TrialEvent::Slip},
                                       {3.0, TrialEvent::ReleasedInBin}};
  const auto path = std::filesystem::temp_directory_path() / "softgrasp_events.csv";
  write_event_log(events, path);
  const auto back = read_event_log(path);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[1].event, TrialEvent::Slip);
  EXPECT_DOUBLE_EQ(back[1].t_s, 1.25);
  EXPECT_EQ(score_trial(back).value, 0.5);
  std::ofstream(path) << "t_s,event\n1.0,teleported\n";
  EXPECT_ANY_THROW(read_event_log(path));
  std::filesystem::remove(path);
}
