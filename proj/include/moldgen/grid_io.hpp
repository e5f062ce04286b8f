#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "moldgen/depth.hpp"

namespace moldgen {

// DGRD layout, all little-endian:
//   "DGRD" | version u32 = 1 | width u32 | height u32 | channels u32 | flags u32
//   | channels·height·width float32, channel-major then row-major.
// flags bit 0: a JSON sidecar "<file>.json" carries the GridSpec.
// flags bits 1-2: Norm of a three-channel sample. bit 3: Side of a
// single-channel image (0 top, 1 bottom).
inline constexpr char kGridMagic[4] = {'D', 'G', 'R', 'D'};
inline constexpr std::uint32_t kGridVersion = 1;
inline constexpr std::size_t kGridHeaderBytes = 24;

inline constexpr std::uint32_t kFlagSidecar = 1u << 0;
inline constexpr std::uint32_t kFlagNormShift = 1;
inline constexpr std::uint32_t kFlagNormMask = 3u << kFlagNormShift;
inline constexpr std::uint32_t kFlagBottomSide = 1u << 3;

using GridValue = std::variant<DepthImage, DepthSample>;

struct GridHeader {
  std::uint32_t version = kGridVersion;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;
  std::uint32_t flags = 0;
};

/// Writes one record. `with_sidecar` only sets flag bit 0; the caller owns
/// writing the sidecar. Returns the number of bytes written.
std::size_t encode_grid(const DepthImage& img, std::ostream& out, bool with_sidecar = false);
std::size_t encode_grid(const DepthSample& sample, std::ostream& out, bool with_sidecar = false);

/// Reads one record. The grid geometry comes from `spec_hint` when given
/// (its width/height must match the header), otherwise from default_spec_for.
GridValue decode_grid(std::istream& in, const std::optional<GridSpec>& spec_hint = std::nullopt);

/// Reads only the header; throws like decode_grid.
GridHeader read_grid_header(std::istream& in);

/// Geometry assumed for records without a sidecar: unit extent in x
/// centered on the origin, default slab planes.
GridSpec default_spec_for(std::uint32_t width, std::uint32_t height);

std::string spec_to_json(const GridSpec& spec);
GridSpec spec_from_json(const std::string& text);

std::filesystem::path sidecar_path(const std::filesystem::path& grid_file);

/// File helpers: write the record plus its sidecar, read both back.
void write_grid_file(const std::filesystem::path& path, const DepthImage& img);
void write_grid_file(const std::filesystem::path& path, const DepthSample& sample);
GridValue read_grid_file(const std::filesystem::path& path);

/// Pair files are Raw three-channel samples with an all-zero edge channel
/// unless an edge grid is supplied.
void write_pair_file(const std::filesystem::path& path, const DepthPair& pair);
DepthPair read_pair_file(const std::filesystem::path& path);

}  // namespace moldgen
