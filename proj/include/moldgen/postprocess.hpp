#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moldgen/depth.hpp"
#include "moldgen/geometry.hpp"
#include "moldgen/mesh.hpp"

namespace moldgen {

struct CleanOptions {
  double snap_band = 0.05;         // unit-range distance to the sentinel that counts as a miss
  std::size_t min_component = 4;   // smaller 8-connected solid components are dropped
};

struct CleanStats {
  std::size_t snapped = 0;             // pixels set empty by the depth rules
  std::size_t removed_components = 0;
  std::size_t removed_pixels = 0;
  std::size_t components = 0;          // surviving components
};

/// Repairs a generated sample into a valid pair. Depths are first rounded
/// to float depth units; the rules below are then evaluated on those
/// floats, which makes the operation idempotent:
///  - a pixel whose top or bottom lies within snap_band of the sentinel
///    (unit value > 1 − snap_band) becomes empty on both sides,
///  - so does any pixel no thicker than the thickness epsilon,
///  - then 8-connected solid components below min_component pixels go.
/// Throws AllEmpty when nothing survives.
DepthPair clean_pair(const DepthSample& sample, const CleanOptions& opts = {}, CleanStats* stats = nullptr);
DepthPair clean_pair(const DepthPair& pair, const CleanOptions& opts = {}, CleanStats* stats = nullptr);

/// 8-connected components of the solid pixels; returns the label per pixel
/// (−1 for empty) and writes the component count.
std::vector<int> label_components(const DepthPair& pair, std::size_t* count = nullptr);

struct Cylinder {
  Axis axis = Axis::Z;
  Vec3 center;
  double radius = 0.0;
  bool through = true;
};

/// Parses [{"axis":"y","center":[x,y,z],"radius":r,"through":true}, …].
/// Throws ParseError.
std::vector<Cylinder> parse_holes(const std::string& json);
std::vector<Cylinder> read_holes_file(const std::filesystem::path& path);

struct HoleResult {
  TriangleMesh mesh;
  Vec3 voxel_size;
  std::size_t input_voxels = 0;
  std::size_t cleared_voxels = 0;
  double input_volume = 0.0;    // input_voxels · voxel volume
  double cleared_volume = 0.0;
  double output_volume = 0.0;
};

/// Voxel boolean: the bounding box of `mesh` is split into `resolution`
/// voxels per axis, a voxel is solid when its center lies inside the mesh
/// (crossing parity of the vertical line through it), voxels whose centers
/// fall inside any cylinder are cleared, and the boundary between solid and
/// empty voxels becomes the output surface. With zero holes the result is
/// the voxelized input. Throws OpenMesh, DegenerateHole (radius below the
/// voxel size across the axis), Unsupported (blind holes), BadRange.
HoleResult subtract_holes(const TriangleMesh& mesh, const std::vector<Cylinder>& holes, std::uint32_t resolution);

}  // namespace moldgen
