#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moldgen/depth.hpp"
#include "moldgen/mesh.hpp"
#include "moldgen/reconstruct.hpp"
#include "moldgen/scan.hpp"

namespace moldgen {

struct ValidateOptions {
  std::size_t rays = 10000;
  std::optional<double> min_wall;       // default 2·cell_size
  std::size_t lateral_lines = 96;       // per axis of each lateral ray lattice
  std::uint64_t seed = 0x5eed;
};

struct SideActionFlags {
  std::size_t x_rays = 0, y_rays = 0;            // rays cast
  std::size_t x_flagged = 0, y_flagged = 0;      // rays meeting an enclosed lateral gap
  bool required() const { return x_flagged > 0 || y_flagged > 0; }
};

struct ManufacturabilityReport {
  CheckReport monotone;
  bool moldable = false;
  ScanStats thickness;  // from a fresh scan
  double min_wall = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> wall_violations;  // solid pixels thinner than min_wall
  double projected_area = 0.0;
  double volume = 0.0;
  SideActionFlags side_action;
  std::vector<std::string> warnings;
};

/// Aggregates the moldability checks. Lateral rays run along x and y on a
/// regular lattice over the bounding box; a ray flags a side action when it
/// crosses more than twice and one of its outside gaps is covered by
/// material both above and below (a laterally enclosed cavity, as opposed
/// to the open space between ribs). Throws OpenMesh, EmptyMesh, OutOfSlab.
ManufacturabilityReport manufacturability_report(const TriangleMesh& mesh, const GridSpec& spec,
                                                 const ValidateOptions& opts = {});

/// Just the lateral ray part of the report.
SideActionFlags side_action_flags(const TriangleMesh& mesh, std::size_t lines_per_axis);

std::string report_json(const ManufacturabilityReport& r);
std::string report_text(const ManufacturabilityReport& r);

}  // namespace moldgen
