#pragma once

#include "moldgen/depth.hpp"

namespace moldgen {

/// Thresholds apply to the unnormalized 3×3 Sobel magnitude (a unit step
/// yields 4). Defaults target UnitRange depths.
struct CannyParams {
  double sigma = 1.0;
  double low = 0.1;
  double high = 0.2;
};

/// Intermediate stages, exposed for testing.
Grid2<double> gaussian_blur(const FloatGrid& image, double sigma);
struct Gradient {
  Grid2<double> magnitude;
  Grid2<std::uint8_t> direction;  // 0: 0°, 1: 45°, 2: 90°, 3: 135°
};
Gradient sobel_gradient(const Grid2<double>& image);
Grid2<double> non_maximum_suppression(const Gradient& g);

/// Gaussian blur (radius ceil(3σ), clamped borders), Sobel, 4-bin direction
/// quantization, non-maximum suppression, then 8-connected hysteresis:
/// pixels ≥ high seed edges, pixels ≥ low join when connected to a seed.
/// Returns a 0/1 grid. Throws BadThresholds unless 0 < low < high, BadRange
/// for negative sigma.
FloatGrid canny(const FloatGrid& image, const CannyParams& params = {});

enum class EdgeCombine { MaxOfSides };

/// Three channel sample (top/gap, bottom/gap, max of both Canny maps) in
/// UnitRange norm; Canny runs on the unit-range depths.
DepthSample make_sample(const DepthPair& pair, const CannyParams& params = {},
                        EdgeCombine combine = EdgeCombine::MaxOfSides);

/// Unit-range view of one depth image.
FloatGrid unit_depths(const DepthImage& img);

}  // namespace moldgen
