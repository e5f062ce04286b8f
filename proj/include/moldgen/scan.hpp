#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moldgen/bvh.hpp"
#include "moldgen/depth.hpp"
#include "moldgen/mesh.hpp"

namespace moldgen {

struct ScanOptions {
  std::uint32_t leaf_size = 8;
  std::size_t threads = 0;  // 0: thread_count()
  double thickness_epsilon = kDefaultThicknessEpsilon;
  bool brute_force = false;  // test every triangle for every pixel
};

struct ScanResult {
  DepthPair pair;
  std::vector<std::string> warnings;
};

/// Casts one vertical line per pixel center. The top depth is z_top minus
/// the highest crossing, the bottom depth the lowest crossing minus
/// z_bottom; columns without crossings, or thinner than the thickness
/// epsilon, store the sentinel on both sides. Since both rays of a pixel
/// lie on the same line, a pixel is never hit from one side only.
/// Throws EmptyMesh, OutOfSlab.
ScanResult scan_mesh_report(const TriangleMesh& mesh, const GridSpec& spec, const ScanOptions& opts = {});
DepthPair scan_mesh(const TriangleMesh& mesh, const GridSpec& spec, const ScanOptions& opts = {});

/// Throws OutOfSlab when the mesh leaves z in [z_bottom, z_top].
void check_in_slab(const TriangleMesh& mesh, const GridSpec& spec);

struct ScanStats {
  std::size_t solid_pixels = 0;
  double min_thickness = 0.0;
  double max_thickness = 0.0;
  double mean_thickness = 0.0;
  double projected_area = 0.0;
  double volume = 0.0;
};

ScanStats scan_stats(const DepthPair& pair);

}  // namespace moldgen
