#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "forestalign/geometry.hpp"
#include "forestalign/spatial_index.hpp"

namespace forestalign {

/// Second-smallest covariance eigenvalue below which a neighborhood counts as
/// collinear (or coincident) and its normal as undefined.
inline constexpr double kDegenerateEigenvalue = 1e-10;

/// Unit normals per point; entries with valid[i] == 0 came from degenerate
/// neighborhoods and hold zero vectors.
struct NormalField {
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> valid;

  std::size_t size() const noexcept { return normals.size(); }
  std::size_t valid_count() const;
  std::vector<std::size_t> valid_indices() const;
  /// Normals of the valid entries, in index order.
  std::vector<Vec3> valid_normals() const;
};

struct NeighborhoodEigen {
  Mat3 covariance;
  Vec3 eigenvalues;   // ascending
  Mat3 eigenvectors;  // column j pairs with eigenvalues[j]
  bool degenerate;    // eigenvalues[1] < kDegenerateEigenvalue
};

/// Covariance of the mean-centered points and its eigen-decomposition.
/// Throws kDegenerateNeighborhood for fewer than 3 points.
NeighborhoodEigen neighborhood_covariance(std::span<const Vec3> points);

/// Folds n onto the hemisphere z >= 0 (ties on z broken by y >= 0, then
/// x >= 0) so that opposite orientations of one surface coincide.
Vec3 canonicalize_normal(const Vec3& n);

/// PCA normal of every point from its neighbors within `radius` (the point
/// itself included). Points with fewer than 3 neighbors or a collinear
/// neighborhood are marked invalid. Throws kInvalidParameter for radius <= 0.
NormalField estimate_normals(const PointCloud& cloud, double radius);
NormalField estimate_normals(const PointCloud& cloud, const KdTree& index, double radius);

/// Single-threaded reference; produces the same bits as estimate_normals.
NormalField estimate_normals_serial(const PointCloud& cloud, double radius);

}  // namespace forestalign
