#include "forestalign/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "forestalign/error.hpp"

namespace forestalign {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    // 64-bit mix of the three cell coordinates (splitmix-style finalizer).
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) + 0xBF58476D1CE4E5B9ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
    h ^= h >> 31;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud::PointCloud(std::vector<Vec3> points, std::vector<Label> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (!labels_.empty() && labels_.size() != points_.size()) {
    throw_invalid("label count " + std::to_string(labels_.size()) +
                  " does not match point count " + std::to_string(points_.size()));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw_invalid("non-finite coordinate at point " + std::to_string(i));
    }
  }
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  std::vector<Vec3> pts;
  pts.reserve(indices.size());
  std::vector<Label> lbl;
  if (has_labels()) lbl.reserve(indices.size());
  for (std::size_t i : indices) {
    pts.push_back(points_.at(i));
    if (has_labels()) lbl.push_back(labels_[i]);
  }
  PointCloud out;
  out.points_ = std::move(pts);
  out.labels_ = std::move(lbl);
  return out;
}

Vec3 PointCloud::min_bound() const {
  if (points_.empty()) return Vec3::Zero();
  Vec3 lo = points_.front();
  for (const auto& p : points_) lo = lo.cwiseMin(p);
  return lo;
}

Vec3 PointCloud::max_bound() const {
  if (points_.empty()) return Vec3::Zero();
  Vec3 hi = points_.front();
  for (const auto& p : points_) hi = hi.cwiseMax(p);
  return hi;
}

Vec3 PointCloud::centroid() const {
  if (points_.empty()) return Vec3::Zero();
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points_) sum += p;
  return sum / static_cast<double>(points_.size());
}

Mat3 euler_to_rotation(double roll_deg, double pitch_deg, double yaw_deg) {
  const Eigen::AngleAxisd rx(roll_deg * kDegToRad, Vec3::UnitX());
  const Eigen::AngleAxisd ry(pitch_deg * kDegToRad, Vec3::UnitY());
  const Eigen::AngleAxisd rz(yaw_deg * kDegToRad, Vec3::UnitZ());
  return (rz * ry * rx).toRotationMatrix();
}

std::array<double, 3> rotation_to_euler(const Mat3& r) {
  const double cp = std::hypot(r(2, 1), r(2, 2));
  const double pitch = std::atan2(-r(2, 0), cp);
  double roll = 0.0;
  double yaw = 0.0;
  if (cp > 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal lock: only roll -/+ yaw is observable; attribute it to yaw.
    yaw = std::atan2(-r(0, 1), r(1, 1));
  }
  return {roll * kRadToDeg, pitch * kRadToDeg, yaw * kRadToDeg};
}

RigidTransform RigidTransform::from_euler(const EulerPose& pose) {
  RigidTransform t;
  t.rotation = euler_to_rotation(pose.roll, pose.pitch, pose.yaw);
  t.translation = Vec3(pose.tx, pose.ty, pose.tz);
  return t;
}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  RigidTransform t;
  t.rotation = m.topLeftCorner<3, 3>();
  t.translation = m.topRightCorner<3, 1>();
  return t;
}

EulerPose RigidTransform::to_euler() const {
  const auto rpy = rotation_to_euler(rotation);
  return {rpy[0], rpy[1], rpy[2], translation.x(), translation.y(), translation.z()};
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

RigidTransform RigidTransform::operator*(const RigidTransform& inner) const {
  RigidTransform out;
  out.rotation = rotation * inner.rotation;
  out.translation = rotation * inner.translation + translation;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Mat3 gram = rotation.transpose() * rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner) {
  return outer * inner;
}

RigidTransform invert(const RigidTransform& transform) { return transform.inverse(); }

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform) {
  std::vector<Vec3> out(cloud.size());
  const auto pts = cloud.points();
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = transform.apply(pts[i]);
  return PointCloud(std::move(out), std::vector<Label>(cloud.labels().begin(), cloud.labels().end()));
}

Mat3 orthonormalize(const Mat3& rotation) {
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

double rotation_angle_deg(const Mat3& a, const Mat3& b) {
  const Mat3 rel = a.transpose() * b;
  const double c = std::clamp((rel.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c) * kRadToDeg;
}

VoxelKey voxel_key(const Vec3& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell)),
          static_cast<std::int64_t>(std::floor(p.y() / cell)),
          static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

PointCloud voxel_downsample(const PointCloud& cloud, double cell) {
  if (!(cell > 0.0) || !std::isfinite(cell)) {
    throw_invalid("voxel size must be positive, got " + std::to_string(cell));
  }
  struct Accum {
    Vec3 sum = Vec3::Zero();
    std::size_t count = 0;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
  slot.reserve(cloud.size());
  std::vector<Accum> accum;
  std::vector<std::size_t> owner(cloud.size());

  const auto pts = cloud.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [it, inserted] = slot.try_emplace(voxel_key(pts[i], cell), accum.size());
    if (inserted) accum.emplace_back();
    accum[it->second].sum += pts[i];
    accum[it->second].count += 1;
    owner[i] = it->second;
  }

  std::vector<Vec3> out(accum.size());
  for (std::size_t v = 0; v < accum.size(); ++v) {
    out[v] = accum[v].sum / static_cast<double>(accum[v].count);
  }

  std::vector<Label> labels;
  if (cloud.has_labels()) {
    // Few distinct labels per voxel; a flat list beats a map here.
    std::vector<std::vector<std::pair<Label, std::size_t>>> votes(accum.size());
    const auto in_labels = cloud.labels();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto& tally = votes[owner[i]];
      auto hit = std::find_if(tally.begin(), tally.end(),
                              [&](const auto& e) { return e.first == in_labels[i]; });
      if (hit == tally.end()) {
        tally.emplace_back(in_labels[i], 1);
      } else {
        hit->second += 1;
      }
    }
    labels.resize(accum.size());
    for (std::size_t v = 0; v < accum.size(); ++v) {
      Label best = 0;
      std::size_t best_count = 0;
      for (const auto& [label, count] : votes[v]) {
        if (count > best_count || (count == best_count && label < best)) {
          best = label;
          best_count = count;
        }
      }
      labels[v] = best;
    }
  }
  return PointCloud(std::move(out), std::move(labels));
}

}  // namespace forestalign
