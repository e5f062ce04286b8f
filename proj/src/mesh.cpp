#include "moldgen/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_map>

#include "moldgen/error.hpp"

namespace moldgen {

namespace {

struct EdgeUse {
  std::uint64_t key;  // (min << 32) | max
  bool forward;       // traversed min -> max
  bool operator<(const EdgeUse& o) const { return key < o.key; }
};

struct CoordKey {
  std::uint64_t x, y, z;
  bool operator==(const CoordKey&) const = default;
};

struct CoordHash {
  std::size_t operator()(const CoordKey& k) const {
    std::uint64_t h = k.x * 0x9E3779B97F4A7C15ull;
    h ^= k.y + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h ^= k.z + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

CoordKey key_of(const Vec3& p) {
  // +0.0 folds negative zero onto positive zero.
  return {std::bit_cast<std::uint64_t>(p.x + 0.0), std::bit_cast<std::uint64_t>(p.y + 0.0),
          std::bit_cast<std::uint64_t>(p.z + 0.0)};
}

double area_tolerance(const std::vector<Vec3>& vertices) {
  Aabb b;
  for (const auto& v : vertices) b.expand(v);
  if (b.empty()) return kDegenerateAreaTolerance;
  const double d2 = dot(b.extent(), b.extent());
  return kDegenerateAreaTolerance * std::max(1.0, d2);
}

MeshBuildResult compact(const std::vector<std::uint32_t>& remap, const std::vector<Triangle>& triangles,
                        std::vector<Vec3> unique) {
  const double tol = area_tolerance(unique);
  std::vector<Triangle> kept;
  kept.reserve(triangles.size());
  std::size_t dropped = 0;
  for (const auto& t : triangles) {
    const Triangle r = {remap[t[0]], remap[t[1]], remap[t[2]]};
    if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2] ||
        triangle_area(unique[r[0]], unique[r[1]], unique[r[2]]) <= tol) {
      ++dropped;
      continue;
    }
    kept.push_back(r);
  }
  // Drop vertices no surviving triangle references; keep first-seen order.
  std::vector<std::uint32_t> renum(unique.size(), UINT32_MAX);
  std::vector<Vec3> used;
  used.reserve(unique.size());
  for (auto& t : kept)
    for (auto& v : t) {
      if (renum[v] == UINT32_MAX) {
        renum[v] = static_cast<std::uint32_t>(used.size());
        used.push_back(unique[v]);
      }
      v = renum[v];
    }
  return {TriangleMesh(std::move(used), std::move(kept)), dropped};
}

}  // namespace

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm(cross(b - a, c - a)); }

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const auto n = vertices_.size();
  for (const auto& t : triangles_)
    for (auto v : t)
      if (v >= n) throw Error(ErrorCode::InvariantViolation, "triangle index " + std::to_string(v) + " out of range");
  for (const auto& v : vertices_) bounds_.expand(v);

  if (triangles_.empty()) return;
  std::vector<EdgeUse> uses;
  uses.reserve(triangles_.size() * 3);
  for (const auto& t : triangles_) {
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = t[k], b = t[(k + 1) % 3];
      const std::uint32_t lo = std::min(a, b), hi = std::max(a, b);
      uses.push_back({(static_cast<std::uint64_t>(lo) << 32) | hi, a < b});
    }
  }
  std::sort(uses.begin(), uses.end());
  closed_ = oriented_ = manifold_ = true;
  for (std::size_t s = 0; s < uses.size();) {
    std::size_t e = s;
    std::size_t fwd = 0;
    while (e < uses.size() && uses[e].key == uses[s].key) {
      fwd += uses[e].forward ? 1 : 0;
      ++e;
    }
    const std::size_t count = e - s;
    if (count % 2 != 0) closed_ = false;
    if (count != 2) manifold_ = false;
    if (2 * fwd != count) oriented_ = false;
    s = e;
  }
  if (!closed_) oriented_ = false;
}

MeshBuildResult build_mesh(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles) {
  for (const auto& t : triangles)
    for (auto v : t)
      if (v >= vertices.size())
        throw Error(ErrorCode::InvariantViolation, "triangle index " + std::to_string(v) + " out of range");
  std::unordered_map<CoordKey, std::uint32_t, CoordHash> seen;
  seen.reserve(vertices.size());
  std::vector<Vec3> unique;
  std::vector<std::uint32_t> remap(vertices.size());
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    auto [it, inserted] = seen.try_emplace(key_of(vertices[k]), static_cast<std::uint32_t>(unique.size()));
    if (inserted) unique.push_back(vertices[k]);
    remap[k] = it->second;
  }
  return compact(remap, triangles, std::move(unique));
}

MeshBuildResult weld_vertices(const TriangleMesh& mesh, double tolerance) {
  if (!(tolerance > 0.0)) return build_mesh(mesh.vertices(), mesh.triangles());
  struct CellKey {
    long long x, y, z;
    bool operator==(const CellKey&) const = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& k) const {
      return static_cast<std::size_t>(k.x * 73856093ll ^ k.y * 19349663ll ^ k.z * 83492791ll);
    }
  };
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellHash> cells;
  std::vector<Vec3> unique;
  std::vector<std::uint32_t> remap(mesh.vertex_count());
  auto cell_of = [&](const Vec3& p) {
    return CellKey{static_cast<long long>(std::floor(p.x / tolerance)), static_cast<long long>(std::floor(p.y / tolerance)),
                   static_cast<long long>(std::floor(p.z / tolerance))};
  };
  for (std::size_t k = 0; k < mesh.vertex_count(); ++k) {
    const Vec3& p = mesh.vertices()[k];
    const CellKey c = cell_of(p);
    std::uint32_t found = UINT32_MAX;
    for (long long dx = -1; dx <= 1 && found == UINT32_MAX; ++dx)
      for (long long dy = -1; dy <= 1 && found == UINT32_MAX; ++dy)
        for (long long dz = -1; dz <= 1 && found == UINT32_MAX; ++dz) {
          auto it = cells.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells.end()) continue;
          for (auto u : it->second)
            if (norm(unique[u] - p) <= tolerance) {
              found = u;
              break;
            }
        }
    if (found == UINT32_MAX) {
      found = static_cast<std::uint32_t>(unique.size());
      unique.push_back(p);
      cells[c].push_back(found);
    }
    remap[k] = found;
  }
  return compact(remap, mesh.triangles(), std::move(unique));
}

double signed_volume(const TriangleMesh& mesh) {
  if (!mesh.is_closed() || !mesh.is_consistently_oriented())
    throw Error(ErrorCode::OpenMesh, "signed volume needs a closed, consistently oriented mesh");
  const Vec3 c = mesh.bounds().center();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto p = mesh.corners(t);
    sum += dot(p[0] - c, cross(p[1] - c, p[2] - c));
  }
  return sum / 6.0;
}

TriangleMesh flipped(const TriangleMesh& mesh) {
  auto tris = mesh.triangles();
  for (auto& t : tris) std::swap(t[1], t[2]);
  return TriangleMesh(mesh.vertices(), std::move(tris));
}

TriangleMesh merged(const TriangleMesh& a, const TriangleMesh& b) {
  auto verts = a.vertices();
  verts.insert(verts.end(), b.vertices().begin(), b.vertices().end());
  auto tris = a.triangles();
  const auto offset = static_cast<std::uint32_t>(a.vertex_count());
  for (auto t : b.triangles()) tris.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  return TriangleMesh(std::move(verts), std::move(tris));
}

TriangleMesh transformed(const TriangleMesh& mesh, const std::function<Vec3(const Vec3&)>& f) {
  std::vector<Vec3> verts;
  verts.reserve(mesh.vertex_count());
  for (const auto& v : mesh.vertices()) verts.push_back(f(v));
  return TriangleMesh(std::move(verts), mesh.triangles());
}

}  // namespace moldgen
