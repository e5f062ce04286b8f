#pragma once

#include <filesystem>

#include "moldgen/depth.hpp"

namespace moldgen {

/// 8-bit grayscale PNG of values in [0, 1] (clamped), row 0 at the bottom
/// so the image reads like a plan view. Lossy and for inspection only.
void write_png_preview(const std::filesystem::path& path, const FloatGrid& unit_values);

}  // namespace moldgen
