#pragma once

#include <span>
#include <vector>

#include "forestalign/error.hpp"
#include "forestalign/geometry.hpp"
#include "forestalign/spatial_index.hpp"

namespace forestalign {

struct IcpConfig {
  double max_corr_dist = 0.25;  // meters
  int max_iterations = 30;
  /// Stop once the relative change of the inlier RMSE drops below this.
  double rel_tolerance = 1e-6;
  bool parallel = true;
};

struct IcpResult {
  RigidTransform transform;
  double inlier_rmse = 0.0;
  std::size_t inliers = 0;
  int iterations = 0;  // rigid updates applied
  bool converged = false;
  /// Inlier RMSE at every evaluated pose, the returned pose last.
  std::vector<double> rmse_trace;
  /// Truncated objective mean(min(d_i^2, max_corr_dist^2)) over all source
  /// points at every evaluated pose; never increases.
  std::vector<double> objective_trace;
};

/// Raised when a pose leaves no source point within range of the target.
/// Carries the last pose that still had correspondences (or the initial
/// pose).
class NoOverlapError : public Error {
 public:
  NoOverlapError(const std::string& message, RigidTransform last, std::string stage = {})
      : Error(ErrorCode::kNoOverlap, message, std::move(stage)), last_(std::move(last)) {}

  const RigidTransform& last_estimate() const noexcept { return last_; }
  NoOverlapError with_stage(std::string stage) const {
    return NoOverlapError(detail(), last_, std::move(stage));
  }

 private:
  RigidTransform last_;
};

/// Least-squares rigid motion taking `source[i]` onto `target[i]`
/// (centroid alignment plus SVD of the cross-covariance, with reflection
/// correction). Throws kDegenerateCorrespondences for fewer than 3 pairs or
/// a cross-covariance of rank below 2.
RigidTransform estimate_rigid_svd(std::span<const Vec3> source, std::span<const Vec3> target);

/// Point-to-point ICP of `source` against the points indexed by `target`,
/// starting from `init`. Returns the cumulative transform.
IcpResult icp(std::span<const Vec3> source, const KdTree& target, const RigidTransform& init,
              const IcpConfig& config = {});
IcpResult icp(const PointCloud& source, const KdTree& target, const RigidTransform& init,
              const IcpConfig& config = {});

}  // namespace forestalign
