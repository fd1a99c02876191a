#include "forestalign/icp.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "forestalign/kernels.hpp"

namespace forestalign {

RigidTransform estimate_rigid_svd(std::span<const Vec3> source, std::span<const Vec3> target) {
  if (source.size() != target.size()) {
    throw_invalid("estimate_rigid_svd: source and target sizes differ");
  }
  if (source.size() < 3) {
    throw Error(ErrorCode::kDegenerateCorrespondences,
                "need at least 3 correspondences, got " + std::to_string(source.size()));
  }
  const double n = static_cast<double>(source.size());
  Vec3 cs = Vec3::Zero();
  Vec3 ct = Vec3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    cs += source[i];
    ct += target[i];
  }
  cs /= n;
  ct /= n;
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    h.noalias() += (source[i] - cs) * (target[i] - ct).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
    throw Error(ErrorCode::kDegenerateCorrespondences,
                "cross-covariance has rank below 2 (collinear or coincident points)");
  }
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;

  RigidTransform out;
  out.rotation = v * d * u.transpose();
  out.translation = ct - out.rotation * cs;
  return out;
}

namespace {

struct PoseScore {
  double rmse = 0.0;
  double objective = 0.0;
  std::size_t inliers = 0;
};

PoseScore score(const kernels::Correspondences& corr, double max_dist) {
  PoseScore s;
  double sum_in = 0.0;
  std::size_t outliers = 0;
  for (std::size_t i = 0; i < corr.target.size(); ++i) {
    if (corr.target[i] == kernels::kNoMatch) {
      ++outliers;
    } else {
      sum_in += corr.distance[i] * corr.distance[i];
      ++s.inliers;
    }
  }
  const double cap = max_dist * max_dist;
  s.rmse = s.inliers ? std::sqrt(sum_in / static_cast<double>(s.inliers)) : 0.0;
  s.objective = corr.target.empty()
                    ? 0.0
                    : (sum_in + cap * static_cast<double>(outliers)) /
                          static_cast<double>(corr.target.size());
  return s;
}

}  // namespace

IcpResult icp(std::span<const Vec3> source, const KdTree& target, const RigidTransform& init,
              const IcpConfig& config) {
  if (!(config.max_corr_dist > 0.0)) throw_invalid("max_corr_dist must be positive");
  if (config.max_iterations < 1) throw_invalid("max_iterations must be at least 1");
  if (source.empty() || target.empty()) {
    throw Error(ErrorCode::kEmptyInput, "icp needs non-empty source and target");
  }

  IcpResult result;
  RigidTransform pose = init;
  RigidTransform last_good = init;
  kernels::Correspondences corr;
  std::vector<Vec3> moved;
  std::vector<Vec3> matched;

  auto evaluate = [&]() {
    if (config.parallel) {
      kernels::correspondences_parallel(source, pose, target, config.max_corr_dist, corr);
    } else {
      kernels::correspondences_serial(source, pose, target, config.max_corr_dist, corr);
    }
    const PoseScore s = score(corr, config.max_corr_dist);
    if (s.inliers == 0) {
      throw NoOverlapError("no source point within " + std::to_string(config.max_corr_dist) +
                               " m of the target",
                           last_good);
    }
    last_good = pose;
    result.rmse_trace.push_back(s.rmse);
    result.objective_trace.push_back(s.objective);
    result.inlier_rmse = s.rmse;
    result.inliers = s.inliers;
    return s;
  };

  const auto target_pts = target.points();
  double previous = evaluate().rmse;
  while (result.iterations < config.max_iterations) {
    moved.clear();
    matched.clear();
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (corr.target[i] == kernels::kNoMatch) continue;
      moved.push_back(pose.apply(source[i]));
      matched.push_back(target_pts[static_cast<std::size_t>(corr.target[i])]);
    }
    const RigidTransform step = estimate_rigid_svd(moved, matched);
    pose = step * pose;
    pose.rotation = orthonormalize(pose.rotation);
    ++result.iterations;

    const double current = evaluate().rmse;
    if (std::abs(previous - current) <= config.rel_tolerance * previous || current < 1e-12) {
      result.converged = true;
      break;
    }
    previous = current;
  }
  result.transform = pose;
  return result;
}

IcpResult icp(const PointCloud& source, const KdTree& target, const RigidTransform& init,
              const IcpConfig& config) {
  return icp(source.points(), target, init, config);
}

}  // namespace forestalign
