#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace moldgen {

/// Geometry of the scan grid and the slab between the two mold planes.
/// Pixel (i, j) is column i (x) and row j (y); storage is row-major.
struct GridSpec {
  std::uint32_t width = 256;
  std::uint32_t height = 256;
  double x_min = -0.5;
  double y_min = -0.5;
  double cell_size = 1.0 / 256.0;
  double z_top = 0.4;
  double z_bottom = -0.4;

  /// Square n×n grid covering [-0.5, 0.5]² with the default slab planes.
  static GridSpec square(std::uint32_t n, double z_top = 0.4, double z_bottom = -0.4);

  double gap() const { return z_top - z_bottom; }
  double center_x(std::size_t i) const { return x_min + (static_cast<double>(i) + 0.5) * cell_size; }
  double center_y(std::size_t j) const { return y_min + (static_cast<double>(j) + 0.5) * cell_size; }
  double x_max() const { return x_min + width * cell_size; }
  double y_max() const { return y_min + height * cell_size; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * width + i; }

  /// Throws InvariantViolation on a non-positive size, cell or gap.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

enum class Side : std::uint8_t { Top, Bottom };

/// Depths from one plane toward the other. A miss stores exactly the
/// float-rounded gap (see sentinel()).
class DepthImage {
 public:
  DepthImage(const GridSpec& spec, Side side, std::vector<float> data);

  static DepthImage filled(const GridSpec& spec, Side side, float value);
  static DepthImage empty(const GridSpec& spec, Side side) { return filled(spec, side, sentinel(spec)); }

  static float sentinel(const GridSpec& spec) { return static_cast<float>(spec.gap()); }

  const GridSpec& spec() const { return spec_; }
  Side side() const { return side_; }
  std::span<const float> data() const { return data_; }
  float at(std::size_t i, std::size_t j) const { return data_[spec_.index(i, j)]; }
  bool is_miss(std::size_t i, std::size_t j) const { return at(i, j) >= sentinel(spec_); }

  bool operator==(const DepthImage&) const = default;

 private:
  GridSpec spec_;
  Side side_;
  std::vector<float> data_;
};

/// Relative thickness threshold: a column is solid when its thickness
/// exceeds kDefaultThicknessEpsilon · gap.
inline constexpr double kDefaultThicknessEpsilon = 1e-6;

class DepthPair {
 public:
  /// Throws MismatchedSpecs when the grids differ and InvariantViolation
  /// when the sides are swapped.
  DepthPair(DepthImage top, DepthImage bottom, double thickness_epsilon = kDefaultThicknessEpsilon);

  static DepthPair empty(const GridSpec& spec);

  const GridSpec& spec() const { return top_.spec(); }
  const DepthImage& top() const { return top_; }
  const DepthImage& bottom() const { return bottom_; }
  double thickness_epsilon() const { return eps_; }
  double epsilon_absolute() const { return eps_ * spec().gap(); }

  /// gap − top − bottom, unclamped.
  double raw_thickness(std::size_t i, std::size_t j) const {
    return spec().gap() - static_cast<double>(top_.at(i, j)) - static_cast<double>(bottom_.at(i, j));
  }
  bool is_solid(std::size_t i, std::size_t j) const {
    return !top_.is_miss(i, j) && !bottom_.is_miss(i, j) && raw_thickness(i, j) > epsilon_absolute();
  }
  bool is_one_sided_miss(std::size_t i, std::size_t j) const { return top_.is_miss(i, j) != bottom_.is_miss(i, j); }

  bool operator==(const DepthPair& o) const { return top_ == o.top_ && bottom_ == o.bottom_; }

 private:
  DepthImage top_;
  DepthImage bottom_;
  double eps_;
};

/// Generic row-major 2D grid of values.
template <class T>
struct Grid2 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<T> values;

  Grid2() = default;
  Grid2(std::size_t w, std::size_t h, T fill = T{}) : width(w), height(h), values(w * h, fill) {}

  T& operator()(std::size_t i, std::size_t j) { return values[j * width + i]; }
  const T& operator()(std::size_t i, std::size_t j) const { return values[j * width + i]; }
  bool operator==(const Grid2&) const = default;
};

using ThicknessMap = Grid2<double>;
using FloatGrid = Grid2<float>;

/// Column thickness t = gap − top − bottom for solid pixels, 0 elsewhere.
ThicknessMap pair_thickness(const DepthPair& pair);
/// Same, for loose images; throws MismatchedSpecs on differing grids.
ThicknessMap pair_thickness(const DepthImage& top, const DepthImage& bottom);

/// Tensor value normalization of a three-channel sample.
enum class Norm : std::uint8_t { Raw = 0, UnitRange = 1, Symmetric = 2 };

inline constexpr std::size_t kSampleChannels = 3;
enum Channel : std::size_t { kTopChannel = 0, kBottomChannel = 1, kEdgeChannel = 2 };

/// Three channel (top, bottom, edge) tensor, channel-major then row-major.
/// Raw holds depth units; UnitRange divides depths by the gap; Symmetric
/// maps every channel (edge included) affinely onto [-1, 1].
class DepthSample {
 public:
  DepthSample(const GridSpec& spec, Norm norm, std::vector<float> data);

  const GridSpec& spec() const { return spec_; }
  Norm norm() const { return norm_; }
  std::size_t width() const { return spec_.width; }
  std::size_t height() const { return spec_.height; }
  std::span<const float> data() const { return data_; }
  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(data_).subspan(c * spec_.pixel_count(), spec_.pixel_count());
  }
  float at(std::size_t c, std::size_t i, std::size_t j) const { return data_[c * spec_.pixel_count() + spec_.index(i, j)]; }

  /// Converts between normalizations through double precision.
  DepthSample to(Norm target) const;

  /// Checks the value range of every channel; throws InvariantViolation.
  void validate() const;

  bool operator==(const DepthSample&) const = default;

 private:
  GridSpec spec_;
  Norm norm_;
  std::vector<float> data_;
};

/// Raw sample (top, bottom, edge) from a pair and an edge grid holding 0/1.
DepthSample raw_sample(const DepthPair& pair, std::span<const float> edges);

/// Takes the top and bottom channels of a sample back to a pair. Values are
/// clamped into [0, gap]; no repair beyond that is done.
DepthPair sample_to_pair(const DepthSample& sample, double thickness_epsilon = kDefaultThicknessEpsilon);

/// Lists every pixel that breaks a pair invariant. Empty means valid.
struct PairIssue {
  std::size_t i, j;
  const char* what;
};
std::vector<PairIssue> check_pair(const DepthPair& pair);

}  // namespace moldgen
