#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "moldgen/geometry.hpp"

namespace moldgen {

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh with integrity flags computed at construction.
///
/// The flags treat the mesh as a 2-chain:
///  - closed: every undirected edge has an even, non-zero number of incident
///    triangles (exactly two on an edge-manifold mesh), so there is no
///    boundary and no fin;
///  - consistently oriented: every edge is traversed equally often in both
///    directions, which is what the divergence theorem needs.
/// Two solids touching along an edge (four incident triangles) are closed
/// and oriented but not edge-manifold.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  /// Throws InvariantViolation on an out-of-range index.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  bool empty() const { return triangles_.empty(); }

  bool is_closed() const { return closed_; }
  bool is_consistently_oriented() const { return oriented_; }
  bool is_edge_manifold() const { return manifold_; }

  const Aabb& bounds() const { return bounds_; }

  std::array<Vec3, 3> corners(std::size_t t) const {
    const auto& tri = triangles_[t];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  Aabb bounds_;
  bool closed_ = false;
  bool oriented_ = false;
  bool manifold_ = false;
};

/// Triangles with area at or below this fraction of the squared bounding
/// box diagonal (floored at 1) are degenerate. For unit-scale models this is
/// an absolute area tolerance of 1e-12.
inline constexpr double kDegenerateAreaTolerance = 1e-12;

struct MeshBuildResult {
  TriangleMesh mesh;
  std::size_t dropped_degenerate = 0;
};

/// Merges vertices with bit-identical coordinates and drops degenerate
/// triangles (repeated indices or area under tolerance).
MeshBuildResult build_mesh(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles);

/// Merges vertices closer than `tolerance` (grid-hash, first vertex wins),
/// then drops any triangle that collapsed.
MeshBuildResult weld_vertices(const TriangleMesh& mesh, double tolerance);

/// Σ v0·(v1×v2)/6, evaluated about the bounding-box center for accuracy.
/// Throws OpenMesh unless closed and consistently oriented.
double signed_volume(const TriangleMesh& mesh);

/// Reverses every triangle's winding.
TriangleMesh flipped(const TriangleMesh& mesh);

/// Disjoint union; shells keep their own vertices.
TriangleMesh merged(const TriangleMesh& a, const TriangleMesh& b);

TriangleMesh transformed(const TriangleMesh& mesh, const std::function<Vec3(const Vec3&)>& f);

/// Triangle area, used for the degeneracy test.
double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace moldgen
