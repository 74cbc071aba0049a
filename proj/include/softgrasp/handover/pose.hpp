#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

namespace softgrasp::handover {

/// Rigid transform: rotation plus translation in millimetres.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }
  /// Throws std::invalid_argument unless the bottom row is 0 0 0 1.
  static Pose from_matrix(const Eigen::Matrix4d& m);
  Eigen::Matrix4d matrix() const;

  /// Throws std::invalid_argument unless the rotation is orthonormal with
  /// determinant +1 (within `tolerance`) and all entries are finite.
  void validate(double tolerance = 1e-9) const;
};

/// a * b as homogeneous transforms.  Validates both inputs.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// Offset within a marker's plane: along its y and z axes, millimetres.
struct PlanarOffset {
  double dy = 0.0;
  double dz = 0.0;
};

/// Which offset components apply: the wrist offset uses both, the glove only dz.
enum class OffsetAxes { YZ, ZOnly };

/// base * translate(0, dy, dz), with dy dropped for OffsetAxes::ZOnly.
Pose offset_pose(const Pose& base, const PlanarOffset& offset, OffsetAxes axes = OffsetAxes::YZ);

/// Goal vector from the wrist point B to the glove point D, in the camera frame:
/// the translation of (camera->glove marker * glove offset) minus that of
/// (camera->wrist marker * wrist offset).  Only dz of the glove offset is used.
Eigen::Vector3d solve_goal(const Pose& camera_to_wrist_marker, const Pose& camera_to_glove_marker,
                           const PlanarOffset& wrist_offset, const PlanarOffset& glove_offset);

/// Pose file: one pose per line, 12 numbers (row-major rotation, then translation).
/// Blank lines and `#` comments are skipped; every pose is validated.
std::vector<Pose> load_poses(const std::filesystem::path& path);
void save_poses(const std::vector<Pose>& poses, const std::filesystem::path& path);

}  // namespace softgrasp::handover
