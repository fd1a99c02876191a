#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "forestalign/geometry.hpp"

namespace forestalign {

/// Ground-truth classes written into synthetic clouds' labels.
enum class SceneClass : Label { kGround = 0, kTrunk = 1, kFoliage = 2 };

/// Parameters of a synthetic forest plot. Densities are those of the
/// reference sampling; scans thin them with distance.
struct SceneSpec {
  double extent = 100.0;            // square side, centered on the origin
  double ground_amplitude = 2.0;    // peak elevation deviation
  double ground_wavelength = 45.0;  // dominant terrain wavelength
  /// Points of the reference sampling. Scans never exceed this density.
  std::size_t total_points = 3'000'000;
  int n_trees = 30;
  double trunk_radius_min = 0.15;
  double trunk_radius_max = 0.4;
  double trunk_height_min = 8.0;
  double trunk_height_max = 16.0;
  /// Shares of total_points on trunks and on foliage; ground takes the rest.
  double trunk_fraction = 0.12;
  double foliage_fraction = 0.28;
  /// Grass blades per m^2 (ground-labeled clutter, 0.3 m tall).
  double grass_density = 0.0;
  double noise_sigma = 0.005;  // isotropic jitter, meters
  std::uint64_t seed = 1;

  void validate() const;
};

struct TreeInfo {
  Vec3 base;  // trunk foot on the terrain
  double radius;
  double height;
  Vec3 crown_center;
  Vec3 crown_radii;
};

/// Small planar patch: a leaf, or a grass blade when elongated.
struct Patch {
  Vec3 center;
  Vec3 u;  // in-plane half-axis
  Vec3 v;  // in-plane half-axis
  int tree = -1;
};

/// Parametric forest plot; point clouds are drawn from it on demand so that
/// different scans sample the surfaces independently.
class Scene {
 public:
  explicit Scene(const SceneSpec& spec);

  const SceneSpec& spec() const noexcept { return spec_; }
  const std::vector<TreeInfo>& trees() const noexcept { return trees_; }
  const std::vector<Patch>& leaves() const noexcept { return leaves_; }
  const std::vector<Patch>& grass() const noexcept { return grass_; }

  double ground_height(double x, double y) const;

  /// Per-m^2 ground density and per-element point counts of the reference
  /// sampling.
  double ground_density() const noexcept { return ground_density_; }
  double trunk_density() const noexcept { return trunk_density_; }
  int points_per_leaf() const noexcept { return points_per_leaf_; }

  /// Draws a labeled cloud where every candidate point at position p is kept
  /// with probability keep(p) (clamped to [0, 1]).
  PointCloud sample(const std::function<double(const Vec3&)>& keep, std::uint64_t seed) const;

 private:
  SceneSpec spec_;
  std::vector<double> wave_amp_, wave_kx_, wave_ky_, wave_phase_;
  std::vector<TreeInfo> trees_;
  std::vector<Patch> leaves_;
  std::vector<Patch> grass_;
  double ground_density_ = 0.0;
  double trunk_density_ = 0.0;
  int points_per_leaf_ = 8;
};

/// Reference sampling of the whole plot (every candidate point kept).
/// Labels hold SceneClass values.
PointCloud synth_forest_scene(const SceneSpec& spec);

/// Terrestrial scan: points within `max_range` of the scanner head, kept
/// with probability min(1, (falloff_radius / d)^2), expressed in the
/// scanner frame (origin at the head, x axis along `heading_deg`).
struct ScanSpec {
  double x = 0.0;
  double y = 0.0;
  double head_height = 1.5;
  double heading_deg = 0.0;
  double max_range = 30.0;
  double falloff_radius = 8.0;
  std::uint64_t seed = 7;
};

/// Airborne-style view: ground and canopy only, trunks and foliage below
/// `canopy_cut` of the tree height removed, thinned to about `density`
/// points per m^2 of footprint inside a square window. World frame.
struct AerialSpec {
  double center_x = 0.0;
  double center_y = 0.0;
  double window = 60.0;
  double density = 15.0;
  double canopy_cut = 0.6;
  std::uint64_t seed = 11;
};

struct ScanView {
  PointCloud cloud;         // labeled, in the view frame
  RigidTransform to_world;  // view frame -> scene frame
};

ScanView make_tls_scan(const Scene& scene, const ScanSpec& spec);
ScanView make_als_view(const Scene& scene, const AerialSpec& spec);

/// Ground truth mapping source-frame coordinates into the target frame.
inline RigidTransform relative_truth(const ScanView& source, const ScanView& target) {
  return target.to_world.inverse() * source.to_world;
}

struct PairSpec {
  SceneSpec scene;
  ScanSpec source;
  ScanSpec target;
  bool aerial_target = false;
  AerialSpec aerial;
};

struct ScanPair {
  ScanView source;
  ScanView target;
  RigidTransform truth;  // source frame -> target frame
};

ScanPair make_scan_pair(const PairSpec& spec);

/// Two terrestrial scans `separation` meters apart along x, centered on the
/// plot, with different headings.
PairSpec tls_pair_spec(double separation, std::uint64_t seed = 1);

}  // namespace forestalign
