#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moldgen/mesh.hpp"

namespace moldgen {

enum class MeshFormat { StlBinary, StlAscii, Obj, Auto };

struct MeshLoadResult {
  TriangleMesh mesh;
  std::size_t dropped_degenerate = 0;
  std::vector<std::string> warnings;
};

/// Loads STL (binary or ASCII) or Wavefront OBJ. Stored STL normals are
/// ignored; orientation comes from the winding. Throws ParseError (message
/// carries the byte offset), EmptyMesh or IoFailure.
MeshLoadResult load_mesh_report(const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto);
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto);

/// Auto picks from the extension (.obj, otherwise binary STL).
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto);

MeshFormat detect_format(const std::filesystem::path& path);

}  // namespace moldgen
