#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "forestalign/geometry.hpp"
#include "forestalign/scene.hpp"

namespace fa_test {

using forestalign::PointCloud;
using forestalign::RigidTransform;
using forestalign::Vec3;

inline std::vector<Vec3> random_points(std::size_t n, double extent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

inline RigidTransform random_transform(std::mt19937_64& rng, double max_deg = 180.0,
                                       double max_t = 10.0) {
  std::uniform_real_distribution<double> a(-max_deg, max_deg);
  std::uniform_real_distribution<double> p(-std::min(max_deg, 85.0), std::min(max_deg, 85.0));
  std::uniform_real_distribution<double> t(-max_t, max_t);
  return RigidTransform::from_euler({a(rng), p(rng), a(rng), t(rng), t(rng), t(rng)});
}

/// Points on the grid {x0 + i*step, y0 + j*step, z}.
inline std::vector<Vec3> grid_plane(double x0, double y0, double size, double step, double z = 0.0) {
  std::vector<Vec3> pts;
  const int n = static_cast<int>(std::round(size / step));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) pts.emplace_back(x0 + i * step, y0 + j * step, z);
  }
  return pts;
}

/// Dense asymmetric object: a floor, a wall, a sphere and a vertical cylinder.
inline std::vector<Vec3> structured_cloud(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 6000; ++i) pts.emplace_back(-3.0 + 6.0 * u(rng), -2.0 + 4.0 * u(rng), 0.0);
  for (int i = 0; i < 3000; ++i) pts.emplace_back(-3.0, -2.0 + 4.0 * u(rng), 2.5 * u(rng));
  for (int i = 0; i < 3000; ++i) {
    const double z = 2.0 * u(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * u(rng);
    const double s = std::sqrt(1.0 - z * z);
    pts.emplace_back(1.0 + 0.8 * s * std::cos(phi), 0.5 + 0.8 * s * std::sin(phi), 1.0 + 0.8 * z);
  }
  for (int i = 0; i < 3000; ++i) {
    const double phi = 2.0 * std::numbers::pi * u(rng);
    pts.emplace_back(-1.0 + 0.3 * std::cos(phi), -1.2 + 0.3 * std::sin(phi), 3.0 * u(rng));
  }
  return pts;
}

/// Reduced-size forest scene for fast pipeline tests.
inline forestalign::SceneSpec small_scene(std::uint64_t seed, int trees = 12) {
  forestalign::SceneSpec s;
  s.extent = 40.0;
  s.n_trees = trees;
  s.total_points = 400'000;
  s.ground_wavelength = 25.0;
  s.seed = seed;
  return s;
}

}  // namespace fa_test
