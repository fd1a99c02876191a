#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forestalign/geometry.hpp"
#include "forestalign/icp.hpp"
#include "forestalign/matching.hpp"
#include "forestalign/vmf.hpp"

namespace forestalign {

struct ForestAlignConfig {
  double voxel = 0.05;          // grouping / per-level downsampling cell
  double refine_voxel = 0.025;  // final refinement downsampling cell
  double normal_radius = 0.25;
  int k_source = 3;
  int k_target = 3;
  /// Per-level ICP settings.
  IcpConfig icp{0.25, 30, 1e-6, true};
  /// Iteration cap of the final full-cloud refinement.
  int refine_iterations = 50;
  std::uint64_t seed = 0;
  VmfFitOptions vmf{};

  /// Throws kInvalidParameter when a length is not positive or a level
  /// count is outside [1, 4].
  void validate() const;
};

/// Grouping of one downsampled cloud into complexity levels.
struct CloudGrouping {
  PointCloud cloud;  // downsampled at ForestAlignConfig::voxel
  NormalField normals;
  VmfMixture mixture;
  ComplexityProfile profile;
};

struct StageResult {
  /// Source level aligned at this stage, or -1 for the final refinement.
  int source_level = -1;
  int target_level = -1;
  std::size_t source_points = 0;
  std::size_t target_points = 0;
  RigidTransform transform;
  double inlier_rmse = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct RegistrationResult {
  RigidTransform final_transform;
  /// One entry per aligned level, in alignment order, then the refinement.
  std::vector<StageResult> stages;
  GroupAssignment assignment;
  ComplexityProfile source_profile;
  ComplexityProfile target_profile;
  std::vector<VmfComponent> source_components;
  std::vector<VmfComponent> target_components;
  bool converged = false;
  double overlap_percent = 0.0;  // on the refinement clouds, 0.25 m
  double inlier_rmse = 0.0;
  double wall_seconds = 0.0;
};

/// Groups a cloud: downsample at `voxel`, estimate normals and fit a
/// K-level vMF mixture, then score each level.
CloudGrouping group_by_complexity(const PointCloud& cloud, double voxel, double normal_radius,
                                  int k, std::uint64_t seed, const VmfFitOptions& vmf = {});

/// Structure-ordered incremental registration of `source` onto `target`,
/// starting from the identity. Errors carry the failing stage name.
RegistrationResult forest_align(const PointCloud& source, const PointCloud& target,
                                const ForestAlignConfig& config = {});

}  // namespace forestalign
