#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "moldgen/geometry.hpp"
#include "moldgen/mesh.hpp"

namespace moldgen {

/// The two coordinates perpendicular to `axis`, in cyclic order
/// (Z -> x,y; X -> y,z; Y -> z,x).
constexpr std::array<int, 2> plane_axes(Axis axis) {
  const int a = static_cast<int>(axis);
  return {(a + 1) % 3, (a + 2) % 3};
}

/// Intersects the line parallel to `axis` through plane coordinates (u, v)
/// with a triangle and returns the coordinate along `axis` of the hit.
///
/// The test is watertight: edge functions are evaluated with the endpoints
/// in a canonical order, so two triangles sharing an edge see exactly
/// negated values, and points exactly on an edge or vertex are resolved by
/// a fixed symbolic perturbation of the line. On a closed mesh every line
/// therefore crosses the surface an even number of times. Triangles whose
/// projection has zero area (parallel to the line) never report a hit.
std::optional<double> line_hit(const std::array<Vec3, 3>& tri, Axis axis, double u, double v);

class Bvh {
 public:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: first triangle; inner: left child index
    std::uint32_t count = 0;  // leaf: triangle count; inner: 0
    std::uint32_t right = 0;  // inner: right child index
    bool is_leaf() const { return count > 0; }
  };

  /// Median split on the longest centroid axis. Throws EmptyMesh.
  explicit Bvh(const TriangleMesh& mesh, std::uint32_t leaf_size = 8);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  std::size_t triangle_count() const { return tris_.size(); }
  std::uint32_t leaf_size() const { return leaf_size_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  /// Mesh triangle index of the k-th triangle in leaf order.
  std::uint32_t source_index(std::size_t k) const { return order_[k]; }

  /// Calls f(coordinate) for every crossing of the axis-parallel line.
  template <class F>
  void for_each_hit(Axis axis, double u, double v, F&& f) const {
    if (nodes_.empty()) return;
    const auto [a0, a1] = plane_axes(axis);
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& n = nodes_[stack[--top]];
      if (u < n.box.lo[a0] - pad_ || u > n.box.hi[a0] + pad_ || v < n.box.lo[a1] - pad_ || v > n.box.hi[a1] + pad_)
        continue;
      if (n.is_leaf()) {
        for (std::uint32_t k = n.first; k < n.first + n.count; ++k)
          if (auto h = line_hit(tris_[k], axis, u, v)) f(*h);
      } else {
        stack[top++] = n.first;
        stack[top++] = n.right;
      }
    }
  }

  std::vector<double> hits(Axis axis, double u, double v) const;

 private:
  std::uint32_t build(const TriangleMesh& mesh, std::uint32_t begin, std::uint32_t end,
                      const std::vector<Vec3>& centroids, int depth);

  std::vector<Node> nodes_;
  std::vector<std::array<Vec3, 3>> tris_;
  std::vector<std::uint32_t> order_;
  std::uint32_t leaf_size_;
  double pad_ = 0.0;
};

/// Every crossing of the line against every triangle, no acceleration.
std::vector<double> brute_force_hits(const TriangleMesh& mesh, Axis axis, double u, double v);

}  // namespace moldgen
