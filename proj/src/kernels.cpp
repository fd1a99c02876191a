#include "forestalign/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "forestalign/normals.hpp"
#include "forestalign/parallel.hpp"

namespace forestalign::kernels {

namespace {

// Plane fit for one query; `scratch_idx` / `scratch_pts` are reused buffers.
void normal_at(const Vec3& query, const KdTree& index, double radius,
               std::vector<std::size_t>& scratch_idx, std::vector<Vec3>& scratch_pts,
               Vec3& normal, std::uint8_t& valid) {
  index.radius_query_unsorted(query, radius, scratch_idx);
  normal = Vec3::Zero();
  valid = 0;
  if (scratch_idx.size() < 3) return;
  scratch_pts.clear();
  const auto pts = index.points();
  for (std::size_t j : scratch_idx) scratch_pts.push_back(pts[j]);
  const NeighborhoodEigen eig = neighborhood_covariance(scratch_pts);
  if (eig.degenerate) return;
  normal = canonicalize_normal(eig.eigenvectors.col(0).normalized());
  valid = 1;
}

void resize(NormalBuffers& out, std::size_t n) {
  out.normals.assign(n, Vec3::Zero());
  out.valid.assign(n, 0);
}

}  // namespace

void normals_serial(std::span<const Vec3> queries, const KdTree& index, double radius,
                    NormalBuffers& out) {
  resize(out, queries.size());
  std::vector<std::size_t> idx;
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    normal_at(queries[i], index, radius, idx, pts, out.normals[i], out.valid[i]);
  }
}

void normals_parallel(std::span<const Vec3> queries, const KdTree& index, double radius,
                      NormalBuffers& out) {
  resize(out, queries.size());
  const auto n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel
  {
    std::vector<std::size_t> idx;
    std::vector<Vec3> pts;
#pragma omp for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
      normal_at(queries[i], index, radius, idx, pts, out.normals[i], out.valid[i]);
    }
  }
}

namespace {

void resize(Correspondences& out, std::size_t n) {
  out.target.assign(n, kNoMatch);
  out.distance.assign(n, 0.0);
}

void match_one(const Vec3& p, const RigidTransform& transform, const KdTree& target,
               double max_distance, std::int64_t& match, double& distance) {
  const auto hit = target.nearest_within(transform.apply(p), max_distance);
  if (hit) {
    match = static_cast<std::int64_t>(hit->index);
    distance = hit->distance;
  }
}

}  // namespace

void correspondences_serial(std::span<const Vec3> source, const RigidTransform& transform,
                            const KdTree& target, double max_distance, Correspondences& out) {
  resize(out, source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    match_one(source[i], transform, target, max_distance, out.target[i], out.distance[i]);
  }
}

void correspondences_parallel(std::span<const Vec3> source, const RigidTransform& transform,
                              const KdTree& target, double max_distance,
                              Correspondences& out) {
  resize(out, source.size());
  const auto n = static_cast<std::int64_t>(source.size());
#pragma omp parallel for schedule(dynamic, 512)
  for (std::int64_t i = 0; i < n; ++i) {
    match_one(source[i], transform, target, max_distance, out.target[i], out.distance[i]);
  }
}

namespace {

VmfStats empty_stats(std::size_t k) {
  VmfStats s;
  s.mass.assign(k, 0.0);
  s.resultant.assign(k, Vec3::Zero());
  return s;
}

// Log-sum-exp responsibilities of one direction; accumulates into `stats`.
void estep_point(const Vec3& x, const VmfTerms& terms, double* resp_row, double* logits,
                 VmfStats& stats) {
  const std::size_t k_count = terms.size();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < k_count; ++k) {
    logits[k] = terms.log_offset[k] + terms.kappa_mu[k].dot(x);
    top = std::max(top, logits[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    logits[k] = std::exp(logits[k] - top);
    sum += logits[k];
  }
  stats.log_likelihood += top + std::log(sum);
  const double inv = 1.0 / sum;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double r = logits[k] * inv;
    stats.mass[k] += r;
    stats.resultant[k] += r * x;
    if (resp_row) resp_row[k] = r;
  }
}

void accumulate(VmfStats& into, const VmfStats& part) {
  into.log_likelihood += part.log_likelihood;
  for (std::size_t k = 0; k < into.mass.size(); ++k) {
    into.mass[k] += part.mass[k];
    into.resultant[k] += part.resultant[k];
  }
}

}  // namespace

VmfStats vmf_estep_serial(std::span<const Vec3> directions, const VmfTerms& terms,
                          std::vector<double>* responsibilities) {
  const std::size_t k_count = terms.size();
  const std::size_t n = directions.size();
  if (responsibilities) responsibilities->assign(n * k_count, 0.0);
  std::vector<double> logits(k_count);
  VmfStats total = empty_stats(k_count);
  // Same chunked summation order as the parallel kernel.
  for (std::size_t begin = 0; begin < n; begin += parallel::kReductionChunk) {
    VmfStats part = empty_stats(k_count);
    const std::size_t end = std::min(n, begin + parallel::kReductionChunk);
    for (std::size_t i = begin; i < end; ++i) {
      double* row = responsibilities ? responsibilities->data() + i * k_count : nullptr;
      estep_point(directions[i], terms, row, logits.data(), part);
    }
    accumulate(total, part);
  }
  return total;
}

VmfStats vmf_estep_parallel(std::span<const Vec3> directions, const VmfTerms& terms,
                            std::vector<double>* responsibilities) {
  const std::size_t k_count = terms.size();
  const std::size_t n = directions.size();
  if (responsibilities) responsibilities->assign(n * k_count, 0.0);
  const std::size_t chunks = parallel::chunk_count(n);
  std::vector<VmfStats> partial(chunks, empty_stats(k_count));

#pragma omp parallel
  {
    std::vector<double> logits(k_count);
#pragma omp for schedule(static)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
      const std::size_t begin = static_cast<std::size_t>(c) * parallel::kReductionChunk;
      const std::size_t end = std::min(n, begin + parallel::kReductionChunk);
      for (std::size_t i = begin; i < end; ++i) {
        double* row = responsibilities ? responsibilities->data() + i * k_count : nullptr;
        estep_point(directions[i], terms, row, logits.data(), partial[c]);
      }
    }
  }

  VmfStats total = empty_stats(k_count);
  for (const auto& part : partial) accumulate(total, part);
  return total;
}

}  // namespace forestalign::kernels
