#include "softgrasp/handover/pose.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace softgrasp::handover {

Pose Pose::from_matrix(const Eigen::Matrix4d& m) {
  if (m.row(3) != Eigen::RowVector4d(0, 0, 0, 1)) {
    throw std::invalid_argument("homogeneous transform must end in row 0 0 0 1");
  }
  Pose p;
  p.rotation = m.topLeftCorner<3, 3>();
  p.translation = m.topRightCorner<3, 1>();
  return p;
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

void Pose::validate(double tolerance) const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw std::invalid_argument("pose has non-finite entries");
  }
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tolerance) {
    throw std::invalid_argument("pose rotation is not orthonormal (deviation " +
                                std::to_string(ortho) + ")");
  }
  if (std::abs(rotation.determinant() - 1.0) > tolerance) {
    throw std::invalid_argument("pose rotation is not proper (det != +1)");
  }
}

Pose compose(const Pose& a, const Pose& b) {
  a.validate();
  b.validate();
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Pose inverse(const Pose& p) {
  p.validate();
  Pose out;
  out.rotation = p.rotation.transpose();
  out.translation = -(out.rotation * p.translation);
  return out;
}

Pose offset_pose(const Pose& base, const PlanarOffset& offset, OffsetAxes axes) {
  if (!std::isfinite(offset.dy) || !std::isfinite(offset.dz)) {
    throw std::invalid_argument("planar offset must be finite");
  }
  Pose shift;
  shift.translation = Eigen::Vector3d(0.0, axes == OffsetAxes::YZ ? offset.dy : 0.0, offset.dz);
  return compose(base, shift);
}

Eigen::Vector3d solve_goal(const Pose& camera_to_wrist_marker, const Pose& camera_to_glove_marker,
                           const PlanarOffset& wrist_offset, const PlanarOffset& glove_offset) {
  const Pose wrist = offset_pose(camera_to_wrist_marker, wrist_offset);
  const Pose glove = offset_pose(camera_to_glove_marker, glove_offset, OffsetAxes::ZOnly);
  return glove.translation - wrist.translation;
}

std::vector<Pose> load_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pose file " + path.string());
  std::vector<Pose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double v[12];
    int count = 0;
    double x;
    while (count < 13 && fields >> x) {
      if (count < 12) v[count] = x;
      ++count;
    }
    if (count == 0 && fields.eof()) continue;
    if (count != 12 || !fields.eof()) {
      throw std::runtime_error("pose file " + path.string() + " line " + std::to_string(line_no) +
                               ": expected 12 numbers");
    }
    Pose p;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) p.rotation(r, c) = v[r * 3 + c];
    }
    p.translation = Eigen::Vector3d(v[9], v[10], v[11]);
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("pose file " + path.string() + " line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    poses.push_back(p);
  }
  return poses;
}

void save_poses(const std::vector<Pose>& poses, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write pose file " + path.string());
  out << std::setprecision(17);
  for (const auto& p : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << p.rotation(r, c) << ' ';
    }
    out << p.translation.x() << ' ' << p.translation.y() << ' ' << p.translation.z() << '\n';
  }
}

}  // namespace softgrasp::handover
