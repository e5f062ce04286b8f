#include "moldgen/bvh.hpp"

#include <algorithm>
#include <numeric>

#include "moldgen/error.hpp"

namespace moldgen {

namespace {

struct P2 {
  double u, v;
};

bool lex_less(const P2& a, const P2& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); }

double edge_raw(const P2& a, const P2& b, const P2& p) { return (b.u - a.u) * (p.v - a.v) - (b.v - a.v) * (p.u - a.u); }

// Antisymmetric by construction: edge(a,b,p) == -edge(b,a,p) bit for bit.
double edge(const P2& a, const P2& b, const P2& p) { return lex_less(b, a) ? -edge_raw(b, a, p) : edge_raw(a, b, p); }

// Tie rule for a point exactly on a directed edge, interior to its left:
// the line is nudged by (-e, e^2) in the plane.
bool owns_edge(const P2& a, const P2& b) {
  const double du = b.u - a.u, dv = b.v - a.v;
  return dv > 0.0 || (dv == 0.0 && du > 0.0);
}

}  // namespace

std::optional<double> line_hit(const std::array<Vec3, 3>& tri, Axis axis, double u, double v) {
  const auto [a0, a1] = plane_axes(axis);
  const int s = static_cast<int>(axis);
  const P2 q[3] = {{tri[0][a0], tri[0][a1]}, {tri[1][a0], tri[1][a1]}, {tri[2][a0], tri[2][a1]}};
  const P2 p{u, v};
  const double w[3] = {edge(q[1], q[2], p), edge(q[2], q[0], p), edge(q[0], q[1], p)};

  bool pos = false, neg = false;
  for (double x : w) {
    pos |= x > 0.0;
    neg |= x < 0.0;
  }
  if (pos == neg) return std::nullopt;  // straddles, or all zero (degenerate projection)
  const bool ccw = pos;
  for (int k = 0; k < 3; ++k) {
    if (w[k] != 0.0) continue;
    const P2& a = q[(k + 1) % 3];
    const P2& b = q[(k + 2) % 3];
    if (!(ccw ? owns_edge(a, b) : owns_edge(b, a))) return std::nullopt;
  }

  const double z0 = tri[0][s], z1 = tri[1][s], z2 = tri[2][s];
  if (z0 == z1 && z1 == z2) return z0;
  const double sum = w[0] + w[1] + w[2];
  const double z = (w[0] * z0 + w[1] * z1 + w[2] * z2) / sum;
  return std::clamp(z, std::min({z0, z1, z2}), std::max({z0, z1, z2}));
}

Bvh::Bvh(const TriangleMesh& mesh, std::uint32_t leaf_size) : leaf_size_(std::max<std::uint32_t>(1, leaf_size)) {
  if (mesh.empty()) throw Error(ErrorCode::EmptyMesh, "cannot build a BVH over zero triangles");
  const auto n = static_cast<std::uint32_t>(mesh.triangle_count());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  std::vector<Vec3> centroids(n);
  for (std::uint32_t t = 0; t < n; ++t) {
    const auto c = mesh.corners(t);
    centroids[t] = (c[0] + c[1] + c[2]) / 3.0;
  }
  nodes_.reserve(2 * (n / leaf_size_ + 1));
  build(mesh, 0, n, centroids, 0);
  tris_.reserve(n);
  for (auto t : order_) tris_.push_back(mesh.corners(t));
  const Aabb& root = nodes_[0].box;
  double scale = 1.0;
  for (int k = 0; k < 3; ++k) scale = std::max({scale, std::abs(root.lo[k]), std::abs(root.hi[k])});
  pad_ = 1e-12 * scale;
}

std::uint32_t Bvh::build(const TriangleMesh& mesh, std::uint32_t begin, std::uint32_t end,
                        const std::vector<Vec3>& centroids, int depth) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box, cbox;
  for (std::uint32_t k = begin; k < end; ++k) {
    for (const auto& p : mesh.corners(order_[k])) box.expand(p);
    cbox.expand(centroids[order_[k]]);
  }
  nodes_[index].box = box;
  const std::uint32_t count = end - begin;
  // Traversal stack holds 64 entries; depth 60 is far beyond any median tree.
  if (count <= leaf_size_ || depth >= 60) {
    nodes_[index].first = begin;
    nodes_[index].count = count;
    return index;
  }
  const Vec3 ext = cbox.extent();
  int axis = 0;
  if (ext.y > ext[axis]) axis = 1;
  if (ext.z > ext[axis]) axis = 2;
  const std::uint32_t mid = begin + count / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centroids[a][axis], cb = centroids[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::uint32_t left = build(mesh, begin, mid, centroids, depth + 1);
  const std::uint32_t right = build(mesh, mid, end, centroids, depth + 1);
  nodes_[index].first = left;
  nodes_[index].right = right;
  nodes_[index].count = 0;
  return index;
}

std::size_t Bvh::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::vector<double> Bvh::hits(Axis axis, double u, double v) const {
  std::vector<double> out;
  for_each_hit(axis, u, v, [&](double h) { out.push_back(h); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> brute_force_hits(const TriangleMesh& mesh, Axis axis, double u, double v) {
  std::vector<double> out;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t)
    if (auto h = line_hit(mesh.corners(t), axis, u, v)) out.push_back(*h);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace moldgen
