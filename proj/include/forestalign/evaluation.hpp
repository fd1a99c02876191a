#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "forestalign/forest_align.hpp"
#include "forestalign/geometry.hpp"
#include "forestalign/spatial_index.hpp"

namespace forestalign {

/// Six-parameter error (roll, pitch, yaw in degrees; tx, ty, tz in meters).
using ParamVector = std::array<double, 6>;

/// Wraps an angle in degrees into (-180, 180].
double wrap_degrees(double angle);

/// Euler-parameter difference estimate - truth, angles wrapped.
ParamVector pose_error(const RigidTransform& estimate, const RigidTransform& truth);

/// Per-parameter RMSE of the estimates' Euler parameters against the truth.
/// Throws kEmptyInput for an empty list.
ParamVector param_rmse(std::span<const RigidTransform> estimates, const RigidTransform& truth);

/// Per-parameter RMSE of already computed error vectors.
ParamVector rmse_of(std::span<const ParamVector> errors);

inline constexpr double kOverlapThreshold = 0.25;  // meters

/// Percentage of transformed source points whose nearest target point lies
/// within `threshold`.
double overlap_percent(const PointCloud& source, const PointCloud& target,
                       const RigidTransform& transform, double threshold = kOverlapThreshold);
double overlap_percent(const PointCloud& source, const KdTree& target,
                       const RigidTransform& transform, double threshold = kOverlapThreshold);

/// RMSE of nearest-neighbor distances over transformed source points whose
/// nearest target point lies within `threshold`. Throws NoOverlapError when
/// there is no such point.
double inlier_rmse(const PointCloud& source, const PointCloud& target,
                   const RigidTransform& transform, double threshold = kOverlapThreshold);
double inlier_rmse(const PointCloud& source, const KdTree& target,
                   const RigidTransform& transform, double threshold = kOverlapThreshold);

struct TrialSpec {
  double rot_range = 45.0;    // max |offset| per Euler angle, degrees
  double trans_range = 15.0;  // max |offset| per axis, meters
  int n_trials = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Truth with each Euler angle and translation component shifted by an
/// independent uniform draw in [-range, range]. Deterministic in
/// (spec.seed, trial_index).
RigidTransform perturb_transform(const RigidTransform& truth, const TrialSpec& spec,
                                 int trial_index);

/// Seed handed to forest_align for a given trial.
std::uint64_t trial_seed(std::uint64_t seed, int trial_index);

struct TrialRow {
  int index = 0;
  RigidTransform initial;   // perturbed starting pose (source -> target)
  RigidTransform estimate;  // recovered pose; equals `initial` on failure
  ParamVector initial_error{};
  ParamVector final_error{};
  double overlap_percent = 0.0;
  double inlier_rmse = 0.0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string failure;  // error message when failed
};

struct TrialReport {
  std::vector<TrialRow> trials;
  ParamVector initial_rmse{};
  /// Over every trial; failed trials contribute their initial error.
  ParamVector rmse{};
  std::size_t failed = 0;

  /// Recomputes both RMSE vectors and the failure count from the rows.
  void aggregate();
};

/// Perturbation protocol: for each trial, move the source by a perturbed
/// copy of `truth`, register it against the target with forest_align, and
/// score the composed estimate against the truth.
TrialReport run_trials(const PointCloud& source, const PointCloud& target,
                       const RigidTransform& truth, const TrialSpec& spec,
                       const ForestAlignConfig& config);

/// Baseline: plain point-to-point ICP on the refinement-voxel clouds from
/// the identity, with the same total iteration budget as forest_align.
IcpResult plain_icp_align(const PointCloud& source, const PointCloud& target,
                          const ForestAlignConfig& config);

}  // namespace forestalign
