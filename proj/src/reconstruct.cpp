#include "moldgen/reconstruct.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "moldgen/bvh.hpp"
#include "moldgen/error.hpp"

namespace moldgen {

namespace {

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool solid = false;
};

std::vector<Interval> column_intervals(const DepthPair& pair) {
  const auto& s = pair.spec();
  std::vector<Interval> cols(s.pixel_count());
  bool any = false;
  for (std::size_t j = 0; j < s.height; ++j) {
    for (std::size_t i = 0; i < s.width; ++i) {
      if (pair.is_one_sided_miss(i, j))
        throw Error(ErrorCode::OneSidedMiss, "pixel (" + std::to_string(i) + ", " + std::to_string(j) +
                                                 ") is a miss on one side only");
      if (pair.top().is_miss(i, j)) continue;
      const double t = pair.raw_thickness(i, j);
      if (t < -pair.epsilon_absolute())
        throw Error(ErrorCode::InvertedColumn, "pixel (" + std::to_string(i) + ", " + std::to_string(j) +
                                                   ") has its top surface below its bottom surface");
      if (!pair.is_solid(i, j)) continue;
      auto& c = cols[s.index(i, j)];
      c.solid = true;
      c.lo = s.z_bottom + static_cast<double>(pair.bottom().at(i, j));
      c.hi = s.z_top - static_cast<double>(pair.top().at(i, j));
      any = true;
    }
  }
  if (!any) throw Error(ErrorCode::NoSolidPixels, "depth pair has no solid pixel");
  return cols;
}

// A \ B as up to two intervals.
int subtract(const Interval& a, const Interval& b, Interval out[2]) {
  if (!a.solid) return 0;
  if (!b.solid || b.hi <= a.lo || b.lo >= a.hi) {
    out[0] = a;
    return 1;
  }
  int n = 0;
  if (a.lo < b.lo) out[n++] = {a.lo, b.lo, true};
  if (b.hi < a.hi) out[n++] = {b.hi, a.hi, true};
  return n;
}

class BlockMesher {
 public:
  BlockMesher(const GridSpec& spec, std::vector<Interval> cols)
      : s_(spec), cols_(std::move(cols)), corner_verts_((spec.width + 1) * static_cast<std::size_t>(spec.height + 1)) {}

  TriangleMesh run() {
    const std::size_t w = s_.width, h = s_.height;
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t i = 0; i < w; ++i) {
        const Interval& c = col(i, j);
        if (!c.solid) continue;
        const auto a = vid(i, j, c.hi), b = vid(i + 1, j, c.hi), cc = vid(i + 1, j + 1, c.hi), d = vid(i, j + 1, c.hi);
        tris_.push_back({a, b, cc});
        tris_.push_back({a, cc, d});
        const auto ab = vid(i, j, c.lo), bb = vid(i + 1, j, c.lo), cb = vid(i + 1, j + 1, c.lo), db = vid(i, j + 1, c.lo);
        tris_.push_back({ab, cb, bb});
        tris_.push_back({ab, db, cb});
      }
    // Sides normal to x: between pixel (i-1, j) and (i, j), corners (i, j), (i, j+1).
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t i = 0; i <= w; ++i) {
        const Interval left = i > 0 ? col(i - 1, j) : Interval{};
        const Interval right = i < w ? col(i, j) : Interval{};
        wall(left, right, {i, j}, {i, j + 1}, /*flip_first=*/false);
      }
    // Sides normal to y: between pixel (i, j-1) and (i, j), corners (i, j), (i+1, j).
    for (std::size_t j = 0; j <= h; ++j)
      for (std::size_t i = 0; i < w; ++i) {
        const Interval below = j > 0 ? col(i, j - 1) : Interval{};
        const Interval above = j < h ? col(i, j) : Interval{};
        wall(below, above, {i, j}, {i + 1, j}, /*flip_first=*/true);
      }
    return TriangleMesh(std::move(verts_), std::move(tris_));
  }

 private:
  struct Corner {
    std::size_t i, j;
  };

  const Interval& col(std::size_t i, std::size_t j) const { return cols_[s_.index(i, j)]; }

  std::uint32_t vid(std::size_t ci, std::size_t cj, double z) {
    auto& list = corner_verts_[cj * (s_.width + 1) + ci];
    for (const auto& [zz, id] : list)
      if (zz == z) return id;
    const auto id = static_cast<std::uint32_t>(verts_.size());
    verts_.push_back({s_.x_min + static_cast<double>(ci) * s_.cell_size, s_.y_min + static_cast<double>(cj) * s_.cell_size, z});
    list.emplace_back(z, id);
    return id;
  }

  // Heights of every column end around a corner that fall inside [lo, hi].
  std::vector<double> breaks(const Corner& c, double lo, double hi) const {
    std::vector<double> z;
    for (int dj = -1; dj <= 0; ++dj)
      for (int di = -1; di <= 0; ++di) {
        const long long pi = static_cast<long long>(c.i) + di, pj = static_cast<long long>(c.j) + dj;
        if (pi < 0 || pj < 0 || pi >= s_.width || pj >= s_.height) continue;
        const Interval& iv = col(static_cast<std::size_t>(pi), static_cast<std::size_t>(pj));
        if (!iv.solid) continue;
        for (double v : {iv.lo, iv.hi})
          if (v >= lo && v <= hi) z.push_back(v);
      }
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    return z;
  }

  // Exposed parts of the shared face between columns `first` and `second`.
  // c1 -> c2 runs along the face; triangles are emitted counter-clockwise in
  // (c1->c2, +z), whose normal points from `first` toward `second` for
  // x-faces, and the other way for y-faces (flip_first).
  void wall(const Interval& first, const Interval& second, Corner c1, Corner c2, bool flip_first) {
    Interval pieces[2];
    const int n1 = subtract(first, second, pieces);
    for (int k = 0; k < n1; ++k) strip(pieces[k], c1, c2, flip_first);
    const int n2 = subtract(second, first, pieces);
    for (int k = 0; k < n2; ++k) strip(pieces[k], c1, c2, !flip_first);
  }

  void strip(const Interval& piece, Corner c1, Corner c2, bool flip) {
    const auto lz = breaks(c1, piece.lo, piece.hi);
    const auto rz = breaks(c2, piece.lo, piece.hi);
    std::size_t a = 0, b = 0;
    while (a + 1 < lz.size() || b + 1 < rz.size()) {
      std::array<std::uint32_t, 3> t;
      const bool advance_right = b + 1 < rz.size() && (a + 1 >= lz.size() || rz[b + 1] <= lz[a + 1]);
      if (advance_right) {
        t = {vid(c1.i, c1.j, lz[a]), vid(c2.i, c2.j, rz[b]), vid(c2.i, c2.j, rz[b + 1])};
        ++b;
      } else {
        t = {vid(c1.i, c1.j, lz[a]), vid(c2.i, c2.j, rz[b]), vid(c1.i, c1.j, lz[a + 1])};
        ++a;
      }
      if (flip) std::swap(t[1], t[2]);
      tris_.push_back(t);
    }
  }

  const GridSpec& s_;
  std::vector<Interval> cols_;
  std::vector<std::vector<std::pair<double, std::uint32_t>>> corner_verts_;
  std::vector<Vec3> verts_;
  std::vector<Triangle> tris_;
};

TriangleMesh smooth_mesh(const GridSpec& s, const std::vector<Interval>& cols) {
  std::vector<Vec3> verts;
  // Top and bottom vertex per solid pixel center.
  std::vector<std::uint32_t> top_id(s.pixel_count(), UINT32_MAX), bot_id(s.pixel_count(), UINT32_MAX);
  for (std::size_t j = 0; j < s.height; ++j)
    for (std::size_t i = 0; i < s.width; ++i) {
      const auto k = s.index(i, j);
      if (!cols[k].solid) continue;
      top_id[k] = static_cast<std::uint32_t>(verts.size());
      verts.push_back({s.center_x(i), s.center_y(j), cols[k].hi});
      bot_id[k] = static_cast<std::uint32_t>(verts.size());
      verts.push_back({s.center_x(i), s.center_y(j), cols[k].lo});
    }

  // Top-surface triangles as pixel indices, counter-clockwise from above.
  std::vector<std::array<std::size_t, 3>> surface;
  for (std::size_t j = 0; j + 1 < s.height; ++j)
    for (std::size_t i = 0; i + 1 < s.width; ++i) {
      const std::size_t q[4] = {s.index(i, j), s.index(i + 1, j), s.index(i + 1, j + 1), s.index(i, j + 1)};
      std::size_t ring[4];
      int n = 0;
      for (auto k : q)
        if (cols[k].solid) ring[n++] = k;
      if (n == 4) {
        surface.push_back({q[0], q[1], q[2]});
        surface.push_back({q[0], q[2], q[3]});
      } else if (n == 3) {
        surface.push_back({ring[0], ring[1], ring[2]});
      }
    }
  if (surface.empty())
    throw Error(ErrorCode::NoSolidPixels, "smooth reconstruction needs three mutually adjacent solid pixels");

  std::vector<Triangle> tris;
  std::map<std::pair<std::size_t, std::size_t>, int> edge_use;
  for (const auto& t : surface) {
    tris.push_back({top_id[t[0]], top_id[t[1]], top_id[t[2]]});
    tris.push_back({bot_id[t[0]], bot_id[t[2]], bot_id[t[1]]});
    for (int k = 0; k < 3; ++k) {
      const auto a = t[k], b = t[(k + 1) % 3];
      ++edge_use[{std::min(a, b), std::max(a, b)}];
    }
  }
  // Boundary edges (used once) in the direction their triangle traverses them.
  for (const auto& t : surface)
    for (int k = 0; k < 3; ++k) {
      const auto u = t[k], v = t[(k + 1) % 3];
      if (edge_use[{std::min(u, v), std::max(u, v)}] != 1) continue;
      tris.push_back({top_id[v], top_id[u], bot_id[u]});
      tris.push_back({top_id[v], bot_id[u], bot_id[v]});
    }
  // Compact away vertices of pixels no triangle touches.
  std::vector<std::uint32_t> renum(verts.size(), UINT32_MAX);
  std::vector<Vec3> used;
  for (auto& t : tris)
    for (auto& v : t) {
      if (renum[v] == UINT32_MAX) {
        renum[v] = static_cast<std::uint32_t>(used.size());
        used.push_back(verts[v]);
      }
      v = renum[v];
    }
  return TriangleMesh(std::move(used), std::move(tris));
}

}  // namespace

TriangleMesh reconstruct_solid(const DepthPair& pair, ReconstructMode mode) {
  auto cols = column_intervals(pair);
  if (mode == ReconstructMode::Smooth) return smooth_mesh(pair.spec(), cols);
  return BlockMesher(pair.spec(), std::move(cols)).run();
}

CheckReport monotone_z_check(const TriangleMesh& mesh, std::size_t samples, std::uint64_t seed) {
  CheckReport r;
  r.rays = samples;
  if (mesh.empty()) {
    r.pass = true;
    return r;
  }
  if (!mesh.is_closed()) throw Error(ErrorCode::OpenMesh, "monotone check needs a closed mesh");
  const Bvh bvh(mesh);
  const Aabb& b = mesh.bounds();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(b.lo.x, b.hi.x), uy(b.lo.y, b.hi.y);
  for (std::size_t k = 0; k < samples; ++k) {
    const double x = ux(rng), y = uy(rng);
    std::size_t n = 0;
    bvh.for_each_hit(Axis::Z, x, y, [&](double) { ++n; });
    r.max_crossings = std::max(r.max_crossings, n);
    if (n != 0 && n != 2) ++r.failing_rays;
  }
  r.pass = r.failing_rays == 0;
  return r;
}

}  // namespace moldgen
