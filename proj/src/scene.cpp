#include "forestalign/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "forestalign/error.hpp"

namespace forestalign {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLeafRadius = 0.06;
constexpr double kBladeHalfHeight = 0.15;
constexpr double kBladeHalfWidth = 0.01;
constexpr int kPointsPerBlade = 6;

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream * 0xD1B54A32D192ED03ULL + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(g(rng), g(rng), g(rng));
  } while (v.squaredNorm() < 1e-12);
  return v.normalized();
}

// Two orthonormal vectors spanning the plane normal to n.
std::pair<Vec3, Vec3> plane_basis(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = n.cross(helper).normalized();
  return {e1, n.cross(e1)};
}

}  // namespace

void SceneSpec::validate() const {
  if (!(extent > 0.0)) throw_invalid("scene extent must be positive");
  if (ground_amplitude < 0.0 || !(ground_wavelength > 0.0)) {
    throw_invalid("ground amplitude must be >= 0 and wavelength > 0");
  }
  if (trunk_fraction < 0.0 || foliage_fraction < 0.0 || trunk_fraction + foliage_fraction > 1.0) {
    throw_invalid("trunk and foliage fractions must be >= 0 and sum to at most 1");
  }
  if (grass_density < 0.0 || noise_sigma < 0.0) throw_invalid("densities must be >= 0");
  if (n_trees < 0) throw_invalid("n_trees must be >= 0");
  if (trunk_radius_min <= 0.0 || trunk_radius_max < trunk_radius_min ||
      trunk_height_min <= 0.0 || trunk_height_max < trunk_height_min) {
    throw_invalid("trunk radius/height ranges must be positive and ordered");
  }
}

Scene::Scene(const SceneSpec& spec) : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng(derive(spec_.seed, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Terrain: a few plane waves around the dominant wavelength, scaled so the
  // peak deviation never exceeds the amplitude.
  constexpr int kWaves = 4;
  double amp_sum = 0.0;
  for (int w = 0; w < kWaves; ++w) {
    const double lambda = spec_.ground_wavelength * (0.6 + 1.0 * unit(rng));
    const double dir = kTwoPi * unit(rng);
    wave_amp_.push_back(0.5 + unit(rng));
    wave_kx_.push_back(kTwoPi / lambda * std::cos(dir));
    wave_ky_.push_back(kTwoPi / lambda * std::sin(dir));
    wave_phase_.push_back(kTwoPi * unit(rng));
    amp_sum += wave_amp_.back();
  }
  for (auto& a : wave_amp_) a *= spec_.ground_amplitude / amp_sum;

  const double half = 0.5 * spec_.extent;
  const double area = spec_.extent * spec_.extent;
  const double total = static_cast<double>(spec_.total_points);
  double ground_share = 1.0 - spec_.trunk_fraction - spec_.foliage_fraction;
  if (spec_.n_trees == 0) ground_share = 1.0;
  ground_density_ = ground_share * total / area;

  // Trees on a rejection-sampled layout with a minimum spacing.
  const double margin = 0.05 * spec_.extent;
  const double min_gap = 3.0;
  int tries = 0;
  while (static_cast<int>(trees_.size()) < spec_.n_trees && tries < 100000) {
    ++tries;
    const double x = -half + margin + (spec_.extent - 2 * margin) * unit(rng);
    const double y = -half + margin + (spec_.extent - 2 * margin) * unit(rng);
    bool clear = true;
    for (const auto& t : trees_) {
      if (std::hypot(t.base.x() - x, t.base.y() - y) < min_gap) clear = false;
    }
    if (!clear) continue;
    TreeInfo t;
    t.base = Vec3(x, y, ground_height(x, y));
    t.radius = spec_.trunk_radius_min + (spec_.trunk_radius_max - spec_.trunk_radius_min) * unit(rng);
    t.height = spec_.trunk_height_min + (spec_.trunk_height_max - spec_.trunk_height_min) * unit(rng);
    const double crown_r = 2.0 + 1.5 * unit(rng);
    t.crown_radii = Vec3(crown_r, crown_r, 0.3 * t.height);
    t.crown_center = t.base + Vec3(0.0, 0.0, 0.75 * t.height);
    trees_.push_back(t);
  }

  if (!trees_.empty()) {
    double lateral = 0.0;
    double volume = 0.0;
    for (const auto& t : trees_) {
      lateral += kTwoPi * t.radius * t.height;
      volume += t.crown_radii.prod();
    }
    trunk_density_ = spec_.trunk_fraction * total / lateral;

    const double leaf_total = spec_.foliage_fraction * total / points_per_leaf_;
    for (std::size_t ti = 0; ti < trees_.size(); ++ti) {
      const auto& t = trees_[ti];
      const auto n_leaves =
          static_cast<std::size_t>(std::llround(leaf_total * t.crown_radii.prod() / volume));
      for (std::size_t l = 0; l < n_leaves; ++l) {
        Vec3 off;
        do {
          off = Vec3(2 * unit(rng) - 1, 2 * unit(rng) - 1, 2 * unit(rng) - 1);
        } while (off.squaredNorm() > 1.0);
        const auto [e1, e2] = plane_basis(random_unit(rng));
        leaves_.push_back({t.crown_center + off.cwiseProduct(t.crown_radii), kLeafRadius * e1,
                           kLeafRadius * e2, static_cast<int>(ti)});
      }
    }
  }

  const auto n_blades = static_cast<std::size_t>(std::llround(spec_.grass_density * area));
  for (std::size_t b = 0; b < n_blades; ++b) {
    const double x = -half + spec_.extent * unit(rng);
    const double y = -half + spec_.extent * unit(rng);
    // Blades lean up to ~35 degrees from vertical in a random direction.
    const double lean = 0.6 * unit(rng);
    const double az = kTwoPi * unit(rng);
    const Vec3 up(std::sin(lean) * std::cos(az), std::sin(lean) * std::sin(az), std::cos(lean));
    const double face = kTwoPi * unit(rng);
    const Vec3 side = up.cross(Vec3(std::cos(face), std::sin(face), 0.0)).normalized();
    const Vec3 base(x, y, ground_height(x, y));
    grass_.push_back({base + kBladeHalfHeight * up, kBladeHalfHeight * up,
                      kBladeHalfWidth * side, -1});
  }
}

double Scene::ground_height(double x, double y) const {
  double h = 0.0;
  for (std::size_t w = 0; w < wave_amp_.size(); ++w) {
    h += wave_amp_[w] * std::sin(wave_kx_[w] * x + wave_ky_[w] * y + wave_phase_[w]);
  }
  return h;
}

PointCloud Scene::sample(const std::function<double(const Vec3&)>& keep,
                         std::uint64_t seed) const {
  std::mt19937_64 rng(derive(spec_.seed, seed + 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec_.noise_sigma);
  std::vector<Vec3> pts;
  std::vector<Label> labels;

  auto emit = [&](const Vec3& p, SceneClass cls) {
    const Vec3 q = p + Vec3(noise(rng), noise(rng), noise(rng));
    if (unit(rng) < keep(q)) {
      pts.push_back(q);
      labels.push_back(static_cast<Label>(cls));
    }
  };

  // Ground on a jittered grid.
  const double half = 0.5 * spec_.extent;
  if (ground_density_ > 0.0) {
    const double step = 1.0 / std::sqrt(ground_density_);
    const auto cells = static_cast<std::size_t>(std::ceil(spec_.extent / step));
    for (std::size_t i = 0; i < cells; ++i) {
      for (std::size_t j = 0; j < cells; ++j) {
        const double x = -half + (static_cast<double>(i) + unit(rng)) * step;
        const double y = -half + (static_cast<double>(j) + unit(rng)) * step;
        if (x > half || y > half) continue;
        emit(Vec3(x, y, ground_height(x, y)), SceneClass::kGround);
      }
    }
  }

  for (const auto& t : trees_) {
    const auto n = static_cast<std::size_t>(
        std::llround(trunk_density_ * kTwoPi * t.radius * t.height));
    for (std::size_t k = 0; k < n; ++k) {
      const double a = kTwoPi * unit(rng);
      const double z = t.height * unit(rng);
      emit(t.base + Vec3(t.radius * std::cos(a), t.radius * std::sin(a), z), SceneClass::kTrunk);
    }
  }

  auto patch_points = [&](const Patch& p, int count, SceneClass cls, bool disc) {
    for (int k = 0; k < count; ++k) {
      double a = 0.0;
      double b = 0.0;
      if (disc) {
        const double r = std::sqrt(unit(rng));
        const double th = kTwoPi * unit(rng);
        a = r * std::cos(th);
        b = r * std::sin(th);
      } else {
        a = 2 * unit(rng) - 1;
        b = 2 * unit(rng) - 1;
      }
      emit(p.center + a * p.u + b * p.v, cls);
    }
  };
  for (const auto& leaf : leaves_) patch_points(leaf, points_per_leaf_, SceneClass::kFoliage, true);
  for (const auto& blade : grass_) patch_points(blade, kPointsPerBlade, SceneClass::kGround, false);

  return PointCloud(std::move(pts), std::move(labels));
}

PointCloud synth_forest_scene(const SceneSpec& spec) {
  const Scene scene(spec);
  return scene.sample([](const Vec3&) { return 1.0; }, 0);
}

ScanView make_tls_scan(const Scene& scene, const ScanSpec& spec) {
  const Vec3 head(spec.x, spec.y, scene.ground_height(spec.x, spec.y) + spec.head_height);
  const double range = spec.max_range;
  const double f2 = spec.falloff_radius * spec.falloff_radius;
  const PointCloud world = scene.sample(
      [&](const Vec3& p) {
        const double d2 = (p - head).squaredNorm();
        if (d2 > range * range) return 0.0;
        return d2 <= f2 ? 1.0 : f2 / d2;
      },
      spec.seed);

  ScanView view;
  view.to_world.rotation = euler_to_rotation(0.0, 0.0, spec.heading_deg);
  view.to_world.translation = head;
  view.cloud = apply_transform(world, view.to_world.inverse());
  return view;
}

ScanView make_als_view(const Scene& scene, const AerialSpec& spec) {
  const double hw = 0.5 * spec.window;
  // Foliage below the cut height of its crown counts as mid-story.
  auto eligible = [&](const Vec3& p) {
    if (std::abs(p.x() - spec.center_x) > hw || std::abs(p.y() - spec.center_y) > hw) return 0.0;
    return 1.0;
  };
  const PointCloud raw = scene.sample(eligible, spec.seed);

  std::vector<std::size_t> keep;
  const auto labels = raw.labels();
  const auto pts = raw.points();
  const auto& trees = scene.trees();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto cls = static_cast<SceneClass>(labels[i]);
    if (cls == SceneClass::kTrunk) continue;
    if (cls == SceneClass::kFoliage) {
      // Height above the terrain relative to the tallest nearby tree.
      const double above = pts[i].z() - scene.ground_height(pts[i].x(), pts[i].y());
      double cut = 0.0;
      for (const auto& t : trees) {
        if (std::hypot(t.base.x() - pts[i].x(), t.base.y() - pts[i].y()) <= t.crown_radii.x()) {
          cut = std::max(cut, spec.canopy_cut * t.height);
        }
      }
      if (above < cut) continue;
    }
    keep.push_back(i);
  }

  const double wanted = spec.density * spec.window * spec.window;
  const double p = keep.empty() ? 0.0 : std::min(1.0, wanted / static_cast<double>(keep.size()));
  std::mt19937_64 rng(derive(spec.seed, 99));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> thinned;
  for (std::size_t i : keep) {
    if (unit(rng) < p) thinned.push_back(i);
  }

  ScanView view;
  view.cloud = raw.select(thinned);
  view.to_world = RigidTransform::identity();
  return view;
}

ScanPair make_scan_pair(const PairSpec& spec) {
  const Scene scene(spec.scene);
  ScanPair pair;
  pair.source = make_tls_scan(scene, spec.source);
  pair.target = spec.aerial_target ? make_als_view(scene, spec.aerial)
                                   : make_tls_scan(scene, spec.target);
  pair.truth = relative_truth(pair.source, pair.target);
  return pair;
}

PairSpec tls_pair_spec(double separation, std::uint64_t seed) {
  PairSpec p;
  p.scene.seed = seed;
  p.source.x = -0.5 * separation;
  p.source.heading_deg = 0.0;
  p.source.seed = derive(seed, 1);
  p.target.x = 0.5 * separation;
  p.target.heading_deg = 25.0;
  p.target.seed = derive(seed, 2);
  p.aerial.seed = derive(seed, 3);
  return p;
}

}  // namespace forestalign
