#include "forestalign/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "forestalign/error.hpp"

namespace forestalign {

namespace {

constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

}  // namespace

KdTree::KdTree(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw_invalid("kd-tree supports fewer than 2^32 points");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
  packed_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) packed_[i] = points_[order_[i]];
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, 0.0, 0});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].split = split;
  nodes_[id].axis = axis;
  return id;
}

void KdTree::radius_query_unsorted(const Vec3& center, double r,
                                   std::vector<std::size_t>& out) const {
  if (!(r > 0.0)) throw_invalid("radius must be positive");
  out.clear();
  if (nodes_.empty()) return;
  const double r2 = r * r;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if ((packed_[i] - center).squaredNorm() <= r2) out.push_back(order_[i]);
      }
      continue;
    }
    const double diff = center[node.axis] - node.split;
    // Left holds coordinates <= split, right holds >= split.
    if (diff <= r) stack[top++] = node.left;
    if (diff >= -r) stack[top++] = node.right;
  }
}

std::vector<std::size_t> KdTree::radius_query(const Vec3& center, double r) const {
  std::vector<std::size_t> out;
  radius_query_unsorted(center, r, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree::search_nearest(const Vec3& p, double& best_d2, std::size_t& best_idx) const {
  struct Pending {
    std::int32_t node;
    double plane_d2;
  };
  Pending stack[128];
  int top = 0;
  stack[top++] = {0, 0.0};
  while (top > 0) {
    const Pending cur = stack[--top];
    if (cur.plane_d2 > best_d2) continue;
    const Node& node = nodes_[cur.node];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const double d2 = (packed_[i] - p).squaredNorm();
        const std::size_t idx = order_[i];
        if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
          best_d2 = d2;
          best_idx = idx;
        }
      }
      continue;
    }
    const double diff = p[node.axis] - node.split;
    const std::int32_t near_side = diff < 0.0 ? node.left : node.right;
    const std::int32_t far_side = diff < 0.0 ? node.right : node.left;
    // Push the far side first so the near side is explored first.
    stack[top++] = {far_side, diff * diff};
    stack[top++] = {near_side, 0.0};
  }
}

Neighbor KdTree::nearest(const Vec3& p) const {
  if (points_.empty()) throw Error(ErrorCode::kEmptyInput, "nearest query on an empty index");
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best_idx = kNoIndex;
  search_nearest(p, best_d2, best_idx);
  return {best_idx, std::sqrt(best_d2)};
}

std::optional<Neighbor> KdTree::nearest_within(const Vec3& p, double max_distance) const {
  if (points_.empty()) return std::nullopt;
  double best_d2 = max_distance * max_distance;
  std::size_t best_idx = kNoIndex;
  search_nearest(p, best_d2, best_idx);
  if (best_idx == kNoIndex) return std::nullopt;
  return Neighbor{best_idx, std::sqrt(best_d2)};
}

}  // namespace forestalign
