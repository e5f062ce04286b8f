#include "moldgen/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "moldgen/bvh.hpp"
#include "moldgen/error.hpp"
#include "moldgen/parallel.hpp"

namespace moldgen {

std::vector<int> label_components(const DepthPair& pair, std::size_t* count) {
  const auto& s = pair.spec();
  std::vector<int> label(s.pixel_count(), -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t j = 0; j < s.height; ++j)
    for (std::size_t i = 0; i < s.width; ++i) {
      if (label[s.index(i, j)] >= 0 || !pair.is_solid(i, j)) continue;
      stack.assign(1, s.index(i, j));
      label[s.index(i, j)] = next;
      while (!stack.empty()) {
        const std::size_t k = stack.back();
        stack.pop_back();
        const long ci = static_cast<long>(k % s.width), cj = static_cast<long>(k / s.width);
        for (long dj = -1; dj <= 1; ++dj)
          for (long di = -1; di <= 1; ++di) {
            const long ni = ci + di, nj = cj + dj;
            if (ni < 0 || nj < 0 || ni >= static_cast<long>(s.width) || nj >= static_cast<long>(s.height)) continue;
            const std::size_t nk = s.index(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj));
            if (label[nk] >= 0 || !pair.is_solid(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj))) continue;
            label[nk] = next;
            stack.push_back(nk);
          }
      }
      ++next;
    }
  if (count) *count = static_cast<std::size_t>(next);
  return label;
}

DepthPair clean_pair(const DepthPair& pair, const CleanOptions& opts, CleanStats* stats) {
  if (!(opts.snap_band >= 0.0 && opts.snap_band < 1.0)) throw Error(ErrorCode::BadRange, "snap_band must lie in [0, 1)");
  const auto& s = pair.spec();
  const double gap = s.gap();
  const float miss = DepthImage::sentinel(s);
  const std::size_t n = s.pixel_count();
  std::vector<float> top(pair.top().data().begin(), pair.top().data().end());
  std::vector<float> bot(pair.bottom().data().begin(), pair.bottom().data().end());
  CleanStats st;
  for (std::size_t k = 0; k < n; ++k) {
    const double tu = top[k] / gap, bu = bot[k] / gap;
    const bool was_empty = top[k] >= miss && bot[k] >= miss;
    const bool near = tu > 1.0 - opts.snap_band || bu > 1.0 - opts.snap_band;
    const bool thin = gap - static_cast<double>(top[k]) - static_cast<double>(bot[k]) <= pair.epsilon_absolute();
    if (near || thin || top[k] >= miss || bot[k] >= miss) {
      if (!was_empty) ++st.snapped;
      top[k] = bot[k] = miss;
    }
  }
  DepthPair snapped(DepthImage(s, Side::Top, top), DepthImage(s, Side::Bottom, bot), pair.thickness_epsilon());
  std::size_t ncomp = 0;
  const auto label = label_components(snapped, &ncomp);
  std::vector<std::size_t> size(ncomp, 0);
  for (int l : label)
    if (l >= 0) ++size[static_cast<std::size_t>(l)];
  for (std::size_t k = 0; k < n; ++k)
    if (label[k] >= 0 && size[static_cast<std::size_t>(label[k])] < opts.min_component) {
      top[k] = bot[k] = miss;
      ++st.removed_pixels;
    }
  for (auto c : size) (c < opts.min_component ? st.removed_components : st.components) += 1;
  if (stats) *stats = st;
  if (st.components == 0) throw Error(ErrorCode::AllEmpty, "no solid pixel survives cleaning");
  return DepthPair(DepthImage(s, Side::Top, std::move(top)), DepthImage(s, Side::Bottom, std::move(bot)),
                   pair.thickness_epsilon());
}

DepthPair clean_pair(const DepthSample& sample, const CleanOptions& opts, CleanStats* stats) {
  // sample_to_pair rounds to float depth units and clamps into [0, gap];
  // every rule is then applied to those floats.
  return clean_pair(sample_to_pair(sample), opts, stats);
}

std::vector<Cylinder> parse_holes(const std::string& text) {
  std::vector<Cylinder> out;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_array()) throw Error(ErrorCode::ParseError, "hole list must be a JSON array");
    for (const auto& h : doc) {
      Cylinder c;
      const std::string axis = h.at("axis").get<std::string>();
      if (axis == "x" || axis == "X") c.axis = Axis::X;
      else if (axis == "y" || axis == "Y") c.axis = Axis::Y;
      else if (axis == "z" || axis == "Z") c.axis = Axis::Z;
      else throw Error(ErrorCode::ParseError, "unknown hole axis '" + axis + "'");
      const auto& ctr = h.at("center");
      if (!ctr.is_array() || ctr.size() != 3) throw Error(ErrorCode::ParseError, "hole center needs three numbers");
      c.center = {ctr[0].get<double>(), ctr[1].get<double>(), ctr[2].get<double>()};
      c.radius = h.at("radius").get<double>();
      c.through = h.value("through", true);
      out.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("hole list: ") + e.what());
  }
  return out;
}

std::vector<Cylinder> read_holes_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_holes(ss.str());
}

HoleResult subtract_holes(const TriangleMesh& mesh, const std::vector<Cylinder>& holes, std::uint32_t resolution) {
  if (mesh.empty()) throw Error(ErrorCode::EmptyMesh, "nothing to drill");
  if (!mesh.is_closed()) throw Error(ErrorCode::OpenMesh, "hole subtraction needs a closed mesh");
  if (resolution == 0) throw Error(ErrorCode::BadRange, "resolution must be positive");
  const Aabb box = mesh.bounds();
  const std::size_t nv = resolution;
  Vec3 h;
  for (int a = 0; a < 3; ++a) h[a] = (box.hi[a] - box.lo[a]) / static_cast<double>(nv);
  for (const auto& c : holes) {
    if (!c.through) throw Error(ErrorCode::Unsupported, "blind holes are not supported");
    const auto [p, q] = plane_axes(c.axis);
    if (!(c.radius >= std::max(h[p], h[q])))
      throw Error(ErrorCode::DegenerateHole, "radius " + std::to_string(c.radius) + " is below one voxel");
  }
  auto center = [&](int a, std::size_t k) { return box.lo[a] + (static_cast<double>(k) + 0.5) * h[a]; };
  auto vox = [&](std::size_t i, std::size_t j, std::size_t k) { return (k * nv + j) * nv + i; };

  std::vector<std::uint8_t> solid(nv * nv * nv, 0);
  const Bvh bvh(mesh);
  parallel_for(nv, [&](std::size_t j) {
    std::vector<double> hits;
    for (std::size_t i = 0; i < nv; ++i) {
      hits = bvh.hits(Axis::Z, center(0, i), center(1, j));
      std::size_t below = 0;
      for (std::size_t k = 0; k < nv; ++k) {
        const double z = center(2, k);
        while (below < hits.size() && hits[below] < z) ++below;
        if (below % 2 == 1 && below < hits.size()) solid[vox(i, j, k)] = 1;
      }
    }
  });

  HoleResult r;
  r.voxel_size = h;
  const double cell = h.x * h.y * h.z;
  for (std::size_t k = 0; k < nv; ++k)
    for (std::size_t j = 0; j < nv; ++j)
      for (std::size_t i = 0; i < nv; ++i) {
        auto& v = solid[vox(i, j, k)];
        if (!v) continue;
        ++r.input_voxels;
        const Vec3 p{center(0, i), center(1, j), center(2, k)};
        for (const auto& c : holes) {
          const auto [a, b] = plane_axes(c.axis);
          const double du = p[a] - c.center[a], dv = p[b] - c.center[b];
          if (du * du + dv * dv < c.radius * c.radius) {
            v = 0;
            ++r.cleared_voxels;
            break;
          }
        }
      }
  r.input_volume = static_cast<double>(r.input_voxels) * cell;
  r.cleared_volume = static_cast<double>(r.cleared_voxels) * cell;
  r.output_volume = r.input_volume - r.cleared_volume;

  // Boundary faces between solid and empty voxels, wound outward.
  const std::size_t nl = nv + 1;
  std::vector<std::uint32_t> vid(nl * nl * nl, UINT32_MAX);
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  auto corner = [&](std::size_t ci, std::size_t cj, std::size_t ck) {
    auto& id = vid[(ck * nl + cj) * nl + ci];
    if (id == UINT32_MAX) {
      id = static_cast<std::uint32_t>(verts.size());
      verts.push_back({box.lo.x + static_cast<double>(ci) * h.x, box.lo.y + static_cast<double>(cj) * h.y,
                       box.lo.z + static_cast<double>(ck) * h.z});
    }
    return id;
  };
  auto filled = [&](long i, long j, long k) {
    const long n = static_cast<long>(nv);
    if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return false;
    return solid[vox(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k))] != 0;
  };
  for (std::size_t k = 0; k < nv; ++k)
    for (std::size_t j = 0; j < nv; ++j)
      for (std::size_t i = 0; i < nv; ++i) {
        if (!solid[vox(i, j, k)]) continue;
        const std::size_t idx[3] = {i, j, k};
        for (int a = 0; a < 3; ++a)
          for (int sgn : {-1, 1}) {
            long nb[3] = {static_cast<long>(i), static_cast<long>(j), static_cast<long>(k)};
            nb[a] += sgn;
            if (filled(nb[0], nb[1], nb[2])) continue;
            const int b = (a + 1) % 3, c = (a + 2) % 3;
            std::size_t base[3] = {idx[0], idx[1], idx[2]};
            if (sgn > 0) base[a] += 1;
            auto at = [&](int db, int dc) {
              std::size_t q[3] = {base[0], base[1], base[2]};
              q[b] += static_cast<std::size_t>(db);
              q[c] += static_cast<std::size_t>(dc);
              return corner(q[0], q[1], q[2]);
            };
            const auto p0 = at(0, 0), p1 = at(1, 0), p2 = at(1, 1), p3 = at(0, 1);
            if (sgn > 0) {
              tris.push_back({p0, p1, p2});
              tris.push_back({p0, p2, p3});
            } else {
              tris.push_back({p0, p2, p1});
              tris.push_back({p0, p3, p2});
            }
          }
      }
  if (tris.empty()) throw Error(ErrorCode::EmptyOutput, "every voxel was cleared");
  r.mesh = TriangleMesh(std::move(verts), std::move(tris));
  return r;
}

}  // namespace moldgen
