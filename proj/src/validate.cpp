#include "moldgen/validate.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "moldgen/bvh.hpp"
#include "moldgen/error.hpp"

namespace moldgen {

SideActionFlags side_action_flags(const TriangleMesh& mesh, std::size_t lines) {
  SideActionFlags f;
  if (mesh.empty() || lines == 0) return f;
  const Bvh bvh(mesh);
  const Aabb& b = mesh.bounds();
  auto enclosed = [&](double x, double y, double z) {
    bool above = false, below = false;
    bvh.for_each_hit(Axis::Z, x, y, [&](double h) {
      above |= h > z;
      below |= h < z;
    });
    return above && below;
  };
  for (Axis axis : {Axis::X, Axis::Y}) {
    const auto [a0, a1] = plane_axes(axis);  // X: (y, z); Y: (z, x)
    const int along = static_cast<int>(axis);
    std::size_t flagged = 0;
    for (std::size_t p = 0; p < lines; ++p)
      for (std::size_t q = 0; q < lines; ++q) {
        const double u = b.lo[a0] + (static_cast<double>(p) + 0.5) / static_cast<double>(lines) * (b.hi[a0] - b.lo[a0]);
        const double v = b.lo[a1] + (static_cast<double>(q) + 0.5) / static_cast<double>(lines) * (b.hi[a1] - b.lo[a1]);
        const auto h = bvh.hits(axis, u, v);
        if (h.size() <= 2) continue;
        for (std::size_t k = 1; k + 1 < h.size(); k += 2) {
          Vec3 m;
          m[along] = 0.5 * (h[k] + h[k + 1]);
          m[a0] = u;
          m[a1] = v;
          if (h[k + 1] > h[k] && enclosed(m.x, m.y, m.z)) {
            ++flagged;
            break;
          }
        }
      }
    (axis == Axis::X ? f.x_rays : f.y_rays) = lines * lines;
    (axis == Axis::X ? f.x_flagged : f.y_flagged) = flagged;
  }
  return f;
}

ManufacturabilityReport manufacturability_report(const TriangleMesh& mesh, const GridSpec& spec,
                                                 const ValidateOptions& opts) {
  if (mesh.empty()) throw Error(ErrorCode::EmptyMesh, "nothing to validate");
  if (!mesh.is_closed()) throw Error(ErrorCode::OpenMesh, "validation needs a closed mesh");
  ManufacturabilityReport r;
  r.monotone = monotone_z_check(mesh, opts.rays, opts.seed);
  r.moldable = r.monotone.pass;
  const auto scan = scan_mesh_report(mesh, spec);
  r.warnings = scan.warnings;
  r.thickness = scan_stats(scan.pair);
  r.projected_area = r.thickness.projected_area;
  r.min_wall = opts.min_wall.value_or(2.0 * spec.cell_size);
  for (std::size_t j = 0; j < spec.height; ++j)
    for (std::size_t i = 0; i < spec.width; ++i)
      if (scan.pair.is_solid(i, j) && scan.pair.raw_thickness(i, j) < r.min_wall) r.wall_violations.emplace_back(i, j);
  r.volume = signed_volume(mesh);
  r.side_action = side_action_flags(mesh, opts.lateral_lines);
  return r;
}

std::string report_json(const ManufacturabilityReport& r) {
  nlohmann::json j;
  j["moldable"] = r.moldable;
  j["monotone_z"] = {{"rays", r.monotone.rays},
                     {"max_crossings", r.monotone.max_crossings},
                     {"failing_rays", r.monotone.failing_rays},
                     {"pass", r.monotone.pass}};
  j["thickness"] = {{"solid_pixels", r.thickness.solid_pixels},
                    {"min", r.thickness.min_thickness},
                    {"mean", r.thickness.mean_thickness},
                    {"max", r.thickness.max_thickness}};
  j["min_wall"] = r.min_wall;
  j["wall_violations"] = r.wall_violations.size();
  j["projected_area"] = r.projected_area;
  j["volume"] = r.volume;
  j["side_action"] = {{"required", r.side_action.required()},
                      {"x_rays", r.side_action.x_rays},
                      {"x_flagged", r.side_action.x_flagged},
                      {"y_rays", r.side_action.y_rays},
                      {"y_flagged", r.side_action.y_flagged}};
  j["warnings"] = r.warnings;
  return j.dump(2);
}

std::string report_text(const ManufacturabilityReport& r) {
  std::ostringstream os;
  char buf[160];
  os << "moldable in z: " << (r.moldable ? "PASS" : "FAIL") << " (" << r.monotone.failing_rays << " of "
     << r.monotone.rays << " rays off, max crossings " << r.monotone.max_crossings << ")\n";
  std::snprintf(buf, sizeof buf, "thickness: min %.6g  mean %.6g  max %.6g over %zu pixels\n",
                r.thickness.min_thickness, r.thickness.mean_thickness, r.thickness.max_thickness,
                r.thickness.solid_pixels);
  os << buf;
  std::snprintf(buf, sizeof buf, "min wall %.6g: %zu pixels below\n", r.min_wall, r.wall_violations.size());
  os << buf;
  std::snprintf(buf, sizeof buf, "projected area %.9g  volume %.9g\n", r.projected_area, r.volume);
  os << buf;
  os << "side action: " << (r.side_action.required() ? "REQUIRED" : "none") << " (x " << r.side_action.x_flagged << '/'
     << r.side_action.x_rays << ", y " << r.side_action.y_flagged << '/' << r.side_action.y_rays << ")\n";
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  return os.str();
}

}  // namespace moldgen
