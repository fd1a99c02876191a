#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "forestalign/geometry.hpp"

namespace forestalign {

struct Neighbor {
  std::size_t index;
  double distance;
};

/// Static kd-tree over a point set. Immutable after construction; all
/// queries are const and safe to run concurrently.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 12);
  explicit KdTree(const PointCloud& cloud, std::size_t leaf_size = 12)
      : KdTree(cloud.points(), leaf_size) {}

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  /// Points in the caller's original order.
  std::span<const Vec3> points() const noexcept { return points_; }

  /// Indices i with |x_i - center| <= r, ascending. Throws on r <= 0.
  std::vector<std::size_t> radius_query(const Vec3& center, double r) const;

  /// Same as radius_query but appends into `out` (cleared first) without
  /// sorting; meant for hot loops that reuse a buffer.
  void radius_query_unsorted(const Vec3& center, double r,
                             std::vector<std::size_t>& out) const;

  /// Global nearest neighbor, ties broken by lowest index.
  /// Throws kEmptyInput on an empty tree.
  Neighbor nearest(const Vec3& p) const;

  /// Nearest neighbor restricted to distance <= max_distance.
  std::optional<Neighbor> nearest_within(const Vec3& p, double max_distance) const;

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left;   // -1 for leaves
    std::int32_t right;
    double split;
    int axis;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search_nearest(const Vec3& p, double& best_d2, std::size_t& best_idx) const;

  std::vector<Vec3> points_;
  // Points permuted into leaf order, with their original indices.
  std::vector<Vec3> packed_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace forestalign
