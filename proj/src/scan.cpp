#include "moldgen/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "moldgen/error.hpp"
#include "moldgen/parallel.hpp"

namespace moldgen {

void check_in_slab(const TriangleMesh& mesh, const GridSpec& spec) {
  const Aabb& b = mesh.bounds();
  const double tol = 1e-12 * std::max({1.0, std::abs(spec.z_top), std::abs(spec.z_bottom)});
  if (b.lo.z < spec.z_bottom - tol || b.hi.z > spec.z_top + tol)
    throw Error(ErrorCode::OutOfSlab, "mesh spans z in [" + std::to_string(b.lo.z) + ", " + std::to_string(b.hi.z) +
                                          "], slab is [" + std::to_string(spec.z_bottom) + ", " +
                                          std::to_string(spec.z_top) + "]");
}

ScanResult scan_mesh_report(const TriangleMesh& mesh, const GridSpec& spec, const ScanOptions& opts) {
  spec.validate();
  if (mesh.empty()) throw Error(ErrorCode::EmptyMesh, "nothing to scan");
  check_in_slab(mesh, spec);

  std::vector<std::string> warnings;
  if (!mesh.is_closed()) warnings.push_back("mesh is not closed; depths of open regions are unreliable");

  std::optional<Bvh> bvh;
  if (!opts.brute_force) bvh.emplace(mesh, opts.leaf_size);

  const double gap = spec.gap();
  const double eps = opts.thickness_epsilon * gap;
  const float sentinel = DepthImage::sentinel(spec);
  std::vector<float> top(spec.pixel_count(), sentinel), bottom(spec.pixel_count(), sentinel);

  parallel_for(
      spec.height,
      [&](std::size_t j) {
        const double y = spec.center_y(j);
        for (std::size_t i = 0; i < spec.width; ++i) {
          const double x = spec.center_x(i);
          double hi = -std::numeric_limits<double>::infinity();
          double lo = std::numeric_limits<double>::infinity();
          auto take = [&](double z) {
            hi = std::max(hi, z);
            lo = std::min(lo, z);
          };
          if (bvh) {
            bvh->for_each_hit(Axis::Z, x, y, take);
          } else {
            for (std::size_t t = 0; t < mesh.triangle_count(); ++t)
              if (auto h = line_hit(mesh.corners(t), Axis::Z, x, y)) take(*h);
          }
          if (!(hi >= lo) || hi - lo <= eps) continue;
          const std::size_t k = spec.index(i, j);
          top[k] = static_cast<float>(std::clamp(spec.z_top - hi, 0.0, gap));
          bottom[k] = static_cast<float>(std::clamp(lo - spec.z_bottom, 0.0, gap));
        }
      },
      opts.threads);

  return {DepthPair(DepthImage(spec, Side::Top, std::move(top)), DepthImage(spec, Side::Bottom, std::move(bottom)),
                    opts.thickness_epsilon),
          std::move(warnings)};
}

DepthPair scan_mesh(const TriangleMesh& mesh, const GridSpec& spec, const ScanOptions& opts) {
  return scan_mesh_report(mesh, spec, opts).pair;
}

ScanStats scan_stats(const DepthPair& pair) {
  const auto& s = pair.spec();
  ScanStats st;
  double sum = 0.0;
  st.min_thickness = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < s.height; ++j)
    for (std::size_t i = 0; i < s.width; ++i) {
      if (!pair.is_solid(i, j)) continue;
      const double t = pair.raw_thickness(i, j);
      ++st.solid_pixels;
      sum += t;
      st.min_thickness = std::min(st.min_thickness, t);
      st.max_thickness = std::max(st.max_thickness, t);
    }
  const double cell_area = s.cell_size * s.cell_size;
  if (st.solid_pixels == 0) {
    st.min_thickness = 0.0;
    return st;
  }
  st.mean_thickness = sum / static_cast<double>(st.solid_pixels);
  st.projected_area = static_cast<double>(st.solid_pixels) * cell_area;
  st.volume = sum * cell_area;
  return st;
}

}  // namespace moldgen
