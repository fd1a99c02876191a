#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace forestalign {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Per-point integer tag carried alongside a cloud (synthetic ground truth
/// classes, complexity levels). Negative values mean "unlabeled".
using Label = std::int32_t;

/// An N x 3 set of finite points with an optional label per point.
class PointCloud {
 public:
  PointCloud() = default;
  /// Throws kInvalidParameter if any coordinate is NaN/Inf or if `labels`
  /// is non-empty with a size different from `points`.
  explicit PointCloud(std::vector<Vec3> points, std::vector<Label> labels = {});

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Vec3> points() const noexcept { return points_; }

  bool has_labels() const noexcept { return !labels_.empty(); }
  std::span<const Label> labels() const noexcept { return labels_; }

  /// Sub-cloud made of the listed indices, in the order given.
  PointCloud select(std::span<const std::size_t> indices) const;

  /// Axis-aligned bounds; both are zero for an empty cloud.
  Vec3 min_bound() const;
  Vec3 max_bound() const;
  Vec3 centroid() const;

 private:
  std::vector<Vec3> points_;
  std::vector<Label> labels_;
};

/// Six registration parameters; angles in degrees, translation in meters.
struct EulerPose {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  double tz = 0.0;

  std::array<double, 6> as_array() const { return {roll, pitch, yaw, tx, ty, tz}; }
  static EulerPose from_array(const std::array<double, 6>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
};

/// Rotation R = Rz(yaw) * Ry(pitch) * Rx(roll), angles in degrees.
Mat3 euler_to_rotation(double roll_deg, double pitch_deg, double yaw_deg);

/// Inverse of euler_to_rotation. Returns (roll, pitch, yaw) in degrees with
/// pitch in [-90, 90]; at gimbal lock roll is reported as zero.
std::array<double, 3> rotation_to_euler(const Mat3& rotation);

/// Rigid motion p -> R p + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_euler(const EulerPose& pose);
  static RigidTransform from_matrix(const Mat4& m);

  EulerPose to_euler() const;
  Mat4 matrix() const;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// `*this` applied after `inner`.
  RigidTransform operator*(const RigidTransform& inner) const;
  RigidTransform inverse() const;

  /// True when R^T R = I and det(R) = +1 within `tol`, elementwise.
  bool is_valid(double tol = 1e-9) const;
};

RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner);
RigidTransform invert(const RigidTransform& transform);
PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform);

/// Re-orthonormalizes a nearly orthogonal matrix (closest rotation in the
/// Frobenius sense).
Mat3 orthonormalize(const Mat3& rotation);

/// Rotation angle of `a^T b` in degrees.
double rotation_angle_deg(const Mat3& a, const Mat3& b);

struct VoxelKey {
  std::int64_t x, y, z;
  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
};

/// Integer cell of `p` in a grid of edge `cell`: floor(p / cell) per axis.
VoxelKey voxel_key(const Vec3& p, double cell);

/// Replaces every occupied voxel of edge `cell` with the centroid of its
/// points. Output order follows the first occurrence of each voxel in the
/// input. When the input is labeled, each output point takes the most
/// frequent label of its voxel (smallest label on ties).
/// Throws kInvalidParameter when cell <= 0.
PointCloud voxel_downsample(const PointCloud& cloud, double cell);

}  // namespace forestalign
