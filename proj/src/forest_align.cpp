#include "forestalign/forest_align.hpp"

#include <chrono>
#include <cmath>
#include <utility>

#include "forestalign/kernels.hpp"
#include "forestalign/normals.hpp"
#include "forestalign/spatial_index.hpp"

namespace forestalign {

void ForestAlignConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw_invalid(std::string(name) + " must be positive");
    }
  };
  positive(voxel, "voxel");
  positive(refine_voxel, "refine_voxel");
  positive(normal_radius, "normal_radius");
  positive(icp.max_corr_dist, "max_corr_dist");
  if (k_source < 1 || k_source > 4 || k_target < 1 || k_target > 4) {
    throw_invalid("complexity level counts must lie in [1, 4]");
  }
  if (icp.max_iterations < 1 || refine_iterations < 1) {
    throw_invalid("iteration caps must be at least 1");
  }
}

namespace {

// Runs `fn`, tagging any library error with `stage`.
template <typename Fn>
auto staged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const NoOverlapError& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

std::vector<Vec3> gather(const PointCloud& cloud, const std::vector<int>& labels, int level) {
  std::vector<Vec3> out;
  const auto pts = cloud.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (labels[i] == level) out.push_back(pts[i]);
  }
  return out;
}

}  // namespace

CloudGrouping group_by_complexity(const PointCloud& cloud, double voxel, double normal_radius,
                                  int k, std::uint64_t seed, const VmfFitOptions& vmf) {
  CloudGrouping g;
  g.cloud = staged("downsample", [&] { return voxel_downsample(cloud, voxel); });
  g.normals = staged("normals", [&] { return estimate_normals(g.cloud, normal_radius); });
  g.mixture = staged("grouping", [&] { return fit_vmf_mixture(g.normals, k, seed, vmf); });
  g.profile = staged("complexity", [&] { return structural_complexity(g.normals, g.mixture); });
  return g;
}

RegistrationResult forest_align(const PointCloud& source, const PointCloud& target,
                                const ForestAlignConfig& config) {
  config.validate();
  if (source.empty() || target.empty()) {
    throw Error(ErrorCode::kEmptyInput, "source and target clouds must be non-empty", "input");
  }
  const auto t0 = std::chrono::steady_clock::now();

  const CloudGrouping src = [&] {
    try {
      return group_by_complexity(source, config.voxel, config.normal_radius, config.k_source,
                                 config.seed, config.vmf);
    } catch (const Error& e) {
      throw e.with_stage("source " + e.stage());
    }
  }();
  const CloudGrouping tgt = [&] {
    try {
      return group_by_complexity(target, config.voxel, config.normal_radius, config.k_target,
                                 config.seed, config.vmf);
    } catch (const Error& e) {
      throw e.with_stage("target " + e.stage());
    }
  }();

  RegistrationResult result;
  result.assignment = staged("matching", [&] { return match_groups(src.profile, tgt.profile); });
  result.source_profile = src.profile;
  result.target_profile = tgt.profile;
  result.source_components = src.mixture.components;
  result.target_components = tgt.mixture.components;

  RigidTransform pose = RigidTransform::identity();
  std::vector<Vec3> source_pts;
  std::vector<Vec3> target_pts;
  bool all_converged = true;
  for (std::size_t k = 0; k < result.assignment.sigma.size(); ++k) {
    const int matched = result.assignment.sigma[k];
    if (matched == kUnmatched) continue;
    const auto s_new = gather(src.cloud, src.mixture.labels, static_cast<int>(k));
    const auto t_new = gather(tgt.cloud, tgt.mixture.labels, matched);
    source_pts.insert(source_pts.end(), s_new.begin(), s_new.end());
    target_pts.insert(target_pts.end(), t_new.begin(), t_new.end());

    const std::string stage = "level-" + std::to_string(k);
    const IcpResult level = staged(stage, [&] {
      const KdTree index(target_pts);
      return icp(source_pts, index, pose, config.icp);
    });
    pose = level.transform;
    all_converged = all_converged && level.converged;
    result.stages.push_back({static_cast<int>(k), matched, source_pts.size(), target_pts.size(),
                             level.transform, level.inlier_rmse, level.iterations,
                             level.converged});
  }

  const IcpResult refine = staged("refine", [&] {
    const PointCloud s_fine = voxel_downsample(source, config.refine_voxel);
    const PointCloud t_fine = voxel_downsample(target, config.refine_voxel);
    const KdTree index(t_fine);
    IcpConfig cfg = config.icp;
    cfg.max_iterations = config.refine_iterations;
    IcpResult r = icp(s_fine, index, pose, cfg);

    kernels::Correspondences corr;
    kernels::correspondences_parallel(s_fine.points(), r.transform, index, 0.25, corr);
    std::size_t hits = 0;
    for (auto m : corr.target) hits += m != kernels::kNoMatch ? 1 : 0;
    result.overlap_percent = 100.0 * static_cast<double>(hits) / static_cast<double>(s_fine.size());
    result.stages.push_back({-1, -1, s_fine.size(), t_fine.size(), r.transform, r.inlier_rmse,
                             r.iterations, r.converged});
    return r;
  });

  result.final_transform = refine.transform;
  result.inlier_rmse = refine.inlier_rmse;
  result.converged = all_converged && refine.converged;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace forestalign
