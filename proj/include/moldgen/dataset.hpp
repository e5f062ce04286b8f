#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moldgen/canny.hpp"
#include "moldgen/depth.hpp"
#include "moldgen/mesh.hpp"

namespace moldgen {

inline constexpr double kDefaultMargin = 0.05;

struct Normalized {
  TriangleMesh mesh;
  double scale = 1.0;
  Vec3 translation;  // applied after scaling about the bounding-box center
};

/// Centers the bounding box on the slab center and scales uniformly so the
/// box fits (1 − 2·margin) of the grid extent in x/y and of the gap in z on
/// its tightest axis. Throws EmptyMesh, BadRange.
Normalized normalize_mesh(const TriangleMesh& mesh, const GridSpec& spec, double margin = kDefaultMargin);

/// Either a keep list (only these names pack) or a skip list.
struct Manifest {
  std::optional<std::vector<std::string>> keep;
  std::vector<std::string> skip;

  bool admits(const std::string& name) const;
};

/// {"keep": [...]} or {"skip": [...]}; throws ParseError.
Manifest parse_manifest(const std::string& json);
Manifest read_manifest(const std::filesystem::path& path);

struct PackReport {
  std::vector<std::string> kept;
  std::vector<std::string> skipped;
  std::vector<std::pair<std::string, std::string>> failed;  // name, reason
  GridSpec spec;
};

/// Every *.stl / *.obj in `dir`, in sorted name order: load → normalize →
/// scan → make_sample, appended to a pack file (u32 count, then DGRD
/// records) with the GridSpec in "<out>.json". Per-file failures are
/// collected. Throws EmptyOutput when nothing packs.
PackReport pack_dataset(const std::filesystem::path& dir, const Manifest& manifest, const GridSpec& spec,
                        const CannyParams& canny_params, const std::filesystem::path& out,
                        double margin = kDefaultMargin);

void write_pack(const std::filesystem::path& out, const std::vector<DepthSample>& samples);
std::vector<DepthSample> read_pack(const std::filesystem::path& path);

/// One synthetic bracket: a base plate with ribs, bosses and pockets laid
/// out on a design lattice whose cells are whole pixels of `spec`, and the
/// depth pair any scan at `spec` must reproduce.
struct CorpusMember {
  std::string name;
  TriangleMesh mesh;
  DepthPair pair;
};

/// Deterministic in (n, seed, spec). Throws BadRange for n = 0.
std::vector<CorpusMember> synth_corpus(std::size_t n, std::uint64_t seed, const GridSpec& spec);

}  // namespace moldgen
