#include "forestalign/normals.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "forestalign/error.hpp"
#include "forestalign/kernels.hpp"

namespace forestalign {

std::size_t NormalField::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v ? 1 : 0;
  return n;
}

std::vector<std::size_t> NormalField::valid_indices() const {
  std::vector<std::size_t> out;
  out.reserve(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (valid[i]) out.push_back(i);
  }
  return out;
}

std::vector<Vec3> NormalField::valid_normals() const {
  std::vector<Vec3> out;
  out.reserve(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (valid[i]) out.push_back(normals[i]);
  }
  return out;
}

NeighborhoodEigen neighborhood_covariance(std::span<const Vec3> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::kDegenerateNeighborhood,
                "need at least 3 points, got " + std::to_string(points.size()));
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  NeighborhoodEigen out;
  out.covariance = cov;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  out.degenerate = out.eigenvalues[1] < kDegenerateEigenvalue;
  return out;
}

Vec3 canonicalize_normal(const Vec3& n) {
  constexpr double kTie = 1e-12;
  bool flip = false;
  if (std::abs(n.z()) >= kTie) {
    flip = n.z() < 0.0;
  } else if (std::abs(n.y()) >= kTie) {
    flip = n.y() < 0.0;
  } else {
    flip = n.x() < 0.0;
  }
  return flip ? Vec3(-n) : n;
}

namespace {

void check_radius(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw_invalid("normal radius must be positive, got " + std::to_string(radius));
  }
}

NormalField to_field(kernels::NormalBuffers&& buf) {
  return NormalField{std::move(buf.normals), std::move(buf.valid)};
}

}  // namespace

NormalField estimate_normals(const PointCloud& cloud, const KdTree& index, double radius) {
  check_radius(radius);
  kernels::NormalBuffers buf;
  kernels::normals_parallel(cloud.points(), index, radius, buf);
  return to_field(std::move(buf));
}

NormalField estimate_normals(const PointCloud& cloud, double radius) {
  check_radius(radius);
  const KdTree index(cloud);
  return estimate_normals(cloud, index, radius);
}

NormalField estimate_normals_serial(const PointCloud& cloud, double radius) {
  check_radius(radius);
  const KdTree index(cloud);
  kernels::NormalBuffers buf;
  kernels::normals_serial(cloud.points(), index, radius, buf);
  return to_field(std::move(buf));
}

}  // namespace forestalign
