#pragma once

#include <cstddef>
#include <cstdint>

#include "moldgen/depth.hpp"
#include "moldgen/mesh.hpp"

namespace moldgen {

enum class ReconstructMode { Block, Smooth };

/// Builds a closed, outward-oriented solid from a depth pair.
///
/// Block: every solid pixel becomes a prism from z_bottom + bottom to
/// z_top − top over its footprint. Neighbouring prisms share wall geometry
/// only where their z-ranges differ, and vertical edges are split at every
/// height occurring around a grid corner, so the mesh has no T-junctions.
/// The volume equals Σ t·cell² up to rounding and a vertical line at any
/// pixel center meets the surface at exactly the stored depths.
///
/// Smooth: top and bottom surfaces are triangulated over pixel-center
/// heights (two triangles per 2×2 block of solid centers, one for three)
/// and joined by vertical skirts along the boundary.
///
/// Throws OneSidedMiss, InvertedColumn, NoSolidPixels.
TriangleMesh reconstruct_solid(const DepthPair& pair, ReconstructMode mode = ReconstructMode::Block);

struct CheckReport {
  std::size_t rays = 0;
  std::size_t max_crossings = 0;
  std::size_t failing_rays = 0;  // rays with a crossing count other than 0 or 2
  bool pass = false;
};

/// Casts `samples` vertical lines at uniformly random xy positions in the
/// mesh bounding box and counts surface crossings. A mesh passes when every
/// line crosses 0 or 2 times, i.e. each column holds one material interval
/// and the part can leave a two-part mold along ±z. Throws OpenMesh.
CheckReport monotone_z_check(const TriangleMesh& mesh, std::size_t samples, std::uint64_t seed = 0x5eed);

}  // namespace moldgen
