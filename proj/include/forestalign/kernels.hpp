#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version used by the
// pipeline and a plain serial version kept as the reference for tests and
// benchmarks.

#include <cstdint>
#include <span>
#include <vector>

#include "forestalign/geometry.hpp"
#include "forestalign/spatial_index.hpp"

namespace forestalign::kernels {

// ---------------------------------------------------------------------------
// Normals

/// Outputs of the per-point plane fit.
struct NormalBuffers {
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> valid;
};

/// For each query point, fits a plane to the indexed points within `radius`
/// and writes its canonicalized unit normal. `queries` usually equals the
/// indexed cloud.
void normals_serial(std::span<const Vec3> queries, const KdTree& index, double radius,
                    NormalBuffers& out);
void normals_parallel(std::span<const Vec3> queries, const KdTree& index, double radius,
                      NormalBuffers& out);

// ---------------------------------------------------------------------------
// Nearest-neighbor correspondences

inline constexpr std::int64_t kNoMatch = -1;

struct Correspondences {
  std::vector<std::int64_t> target;  // kNoMatch when nothing within range
  std::vector<double> distance;      // valid only where target >= 0
};

/// Nearest target point of `transform(source[i])` within `max_distance`.
void correspondences_serial(std::span<const Vec3> source, const RigidTransform& transform,
                            const KdTree& target, double max_distance, Correspondences& out);
void correspondences_parallel(std::span<const Vec3> source, const RigidTransform& transform,
                              const KdTree& target, double max_distance,
                              Correspondences& out);

// ---------------------------------------------------------------------------
// vMF mixture E-step

/// Per-component constants of the E-step: log(weight) + log c_3(kappa), and
/// kappa * mu.
struct VmfTerms {
  std::vector<double> log_offset;
  std::vector<Vec3> kappa_mu;
  std::size_t size() const { return log_offset.size(); }
};

/// Sufficient statistics gathered in one pass over the data.
struct VmfStats {
  double log_likelihood = 0.0;
  std::vector<double> mass;         // sum_i r_ik
  std::vector<Vec3> resultant;      // sum_i r_ik x_i
};

/// Computes responsibilities for every direction, the observed-data log
/// likelihood and the M-step sums. When `responsibilities` is non-null it
/// receives the N x K row-major responsibility matrix.
VmfStats vmf_estep_serial(std::span<const Vec3> directions, const VmfTerms& terms,
                          std::vector<double>* responsibilities = nullptr);
/// Chunked reduction: bitwise identical for any thread count.
VmfStats vmf_estep_parallel(std::span<const Vec3> directions, const VmfTerms& terms,
                            std::vector<double>* responsibilities = nullptr);

}  // namespace forestalign::kernels
