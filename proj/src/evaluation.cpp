#include "forestalign/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "forestalign/error.hpp"
#include "forestalign/kernels.hpp"

namespace forestalign {

double wrap_degrees(double angle) {
  double a = std::fmod(angle, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

ParamVector pose_error(const RigidTransform& estimate, const RigidTransform& truth) {
  const auto e = estimate.to_euler().as_array();
  const auto t = truth.to_euler().as_array();
  ParamVector d{};
  for (std::size_t i = 0; i < 6; ++i) d[i] = e[i] - t[i];
  for (std::size_t i = 0; i < 3; ++i) d[i] = wrap_degrees(d[i]);
  return d;
}

ParamVector rmse_of(std::span<const ParamVector> errors) {
  if (errors.empty()) throw Error(ErrorCode::kEmptyInput, "rmse of an empty error list");
  ParamVector sum{};
  for (const auto& e : errors) {
    for (std::size_t i = 0; i < 6; ++i) sum[i] += e[i] * e[i];
  }
  for (auto& s : sum) s = std::sqrt(s / static_cast<double>(errors.size()));
  return sum;
}

ParamVector param_rmse(std::span<const RigidTransform> estimates, const RigidTransform& truth) {
  if (estimates.empty()) throw Error(ErrorCode::kEmptyInput, "param_rmse needs estimates");
  std::vector<ParamVector> errors;
  errors.reserve(estimates.size());
  for (const auto& e : estimates) errors.push_back(pose_error(e, truth));
  return rmse_of(errors);
}

namespace {

kernels::Correspondences nearest_within(const PointCloud& source, const KdTree& target,
                                        const RigidTransform& transform, double threshold) {
  if (!(threshold > 0.0)) throw_invalid("distance threshold must be positive");
  kernels::Correspondences corr;
  kernels::correspondences_parallel(source.points(), transform, target, threshold, corr);
  return corr;
}

}  // namespace

double overlap_percent(const PointCloud& source, const KdTree& target,
                       const RigidTransform& transform, double threshold) {
  if (source.empty() || target.empty()) {
    throw Error(ErrorCode::kEmptyInput, "overlap needs non-empty clouds");
  }
  const auto corr = nearest_within(source, target, transform, threshold);
  std::size_t hits = 0;
  for (auto m : corr.target) hits += m != kernels::kNoMatch ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(source.size());
}

double overlap_percent(const PointCloud& source, const PointCloud& target,
                       const RigidTransform& transform, double threshold) {
  if (target.empty()) throw Error(ErrorCode::kEmptyInput, "overlap needs non-empty clouds");
  return overlap_percent(source, KdTree(target), transform, threshold);
}

double inlier_rmse(const PointCloud& source, const KdTree& target,
                   const RigidTransform& transform, double threshold) {
  const auto corr = nearest_within(source, target, transform, threshold);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < corr.target.size(); ++i) {
    if (corr.target[i] == kernels::kNoMatch) continue;
    sum += corr.distance[i] * corr.distance[i];
    ++n;
  }
  if (n == 0) throw NoOverlapError("no inlier pair within threshold", transform);
  return std::sqrt(sum / static_cast<double>(n));
}

double inlier_rmse(const PointCloud& source, const PointCloud& target,
                   const RigidTransform& transform, double threshold) {
  if (target.empty()) throw NoOverlapError("empty target", transform);
  return inlier_rmse(source, KdTree(target), transform, threshold);
}

void TrialSpec::validate() const {
  if (!(rot_range >= 0.0) || !(trans_range >= 0.0)) throw_invalid("ranges must be >= 0");
  if (n_trials < 1) throw_invalid("n_trials must be at least 1");
}

std::uint64_t trial_seed(std::uint64_t seed, int trial_index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RigidTransform perturb_transform(const RigidTransform& truth, const TrialSpec& spec,
                                 int trial_index) {
  spec.validate();
  std::mt19937_64 rng(trial_seed(spec.seed, trial_index));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto pose = truth.to_euler().as_array();
  for (std::size_t i = 0; i < 6; ++i) {
    const double range = i < 3 ? spec.rot_range : spec.trans_range;
    const double draw = unit(rng);  // always drawn so streams stay aligned
    pose[i] += range * draw;
  }
  return RigidTransform::from_euler(EulerPose::from_array(pose));
}

void TrialReport::aggregate() {
  failed = 0;
  std::vector<ParamVector> init;
  std::vector<ParamVector> fin;
  for (const auto& row : trials) {
    init.push_back(row.initial_error);
    fin.push_back(row.failed ? row.initial_error : row.final_error);
    failed += row.failed ? 1 : 0;
  }
  if (trials.empty()) return;
  initial_rmse = rmse_of(init);
  rmse = rmse_of(fin);
}

TrialReport run_trials(const PointCloud& source, const PointCloud& target,
                       const RigidTransform& truth, const TrialSpec& spec,
                       const ForestAlignConfig& config) {
  spec.validate();
  TrialReport report;
  for (int i = 0; i < spec.n_trials; ++i) {
    TrialRow row;
    row.index = i;
    row.initial = perturb_transform(truth, spec, i);
    row.initial_error = pose_error(row.initial, truth);
    row.estimate = row.initial;

    ForestAlignConfig cfg = config;
    cfg.seed = trial_seed(config.seed, i);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const PointCloud moved = apply_transform(source, row.initial);
      const RegistrationResult r = forest_align(moved, target, cfg);
      row.estimate = r.final_transform * row.initial;
      row.final_error = pose_error(row.estimate, truth);
      row.overlap_percent = r.overlap_percent;
      row.inlier_rmse = r.inlier_rmse;
    } catch (const Error& e) {
      row.failed = true;
      row.failure = e.what();
      row.final_error = row.initial_error;
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.trials.push_back(std::move(row));
  }
  report.aggregate();
  return report;
}

IcpResult plain_icp_align(const PointCloud& source, const PointCloud& target,
                          const ForestAlignConfig& config) {
  config.validate();
  const PointCloud s = voxel_downsample(source, config.refine_voxel);
  const PointCloud t = voxel_downsample(target, config.refine_voxel);
  const KdTree index(t);
  IcpConfig cfg = config.icp;
  cfg.max_iterations = config.icp.max_iterations * std::max(config.k_source, config.k_target) +
                       config.refine_iterations;
  return icp(s, index, RigidTransform::identity(), cfg);
}

}  // namespace forestalign
