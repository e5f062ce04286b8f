#include "moldgen/depth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moldgen/error.hpp"

namespace moldgen {

GridSpec GridSpec::square(std::uint32_t n, double z_top, double z_bottom) {
  GridSpec s;
  s.width = n;
  s.height = n;
  s.x_min = -0.5;
  s.y_min = -0.5;
  s.cell_size = 1.0 / static_cast<double>(n);
  s.z_top = z_top;
  s.z_bottom = z_bottom;
  return s;
}

void GridSpec::validate() const {
  if (width < 1 || height < 1) throw Error(ErrorCode::InvariantViolation, "grid must be at least 1x1");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw Error(ErrorCode::InvariantViolation, "cell_size must be positive");
  if (!std::isfinite(x_min) || !std::isfinite(y_min)) throw Error(ErrorCode::InvariantViolation, "grid origin not finite");
  if (!(z_top > z_bottom) || !std::isfinite(z_top) || !std::isfinite(z_bottom))
    throw Error(ErrorCode::InvariantViolation, "z_top must lie above z_bottom");
}

DepthImage::DepthImage(const GridSpec& spec, Side side, std::vector<float> data)
    : spec_(spec), side_(side), data_(std::move(data)) {
  spec_.validate();
  if (data_.size() != spec_.pixel_count())
    throw Error(ErrorCode::ShapeMismatch, "depth image holds " + std::to_string(data_.size()) + " values, grid has " +
                                              std::to_string(spec_.pixel_count()));
  const float hi = sentinel(spec_);
  for (std::size_t k = 0; k < data_.size(); ++k) {
    const float d = data_[k];
    if (!std::isfinite(d)) throw Error(ErrorCode::NonFiniteValue, "depth at index " + std::to_string(k));
    if (d < 0.0f || d > hi)
      throw Error(ErrorCode::InvariantViolation,
                  "depth " + std::to_string(d) + " outside [0, gap] at index " + std::to_string(k));
  }
}

DepthImage DepthImage::filled(const GridSpec& spec, Side side, float value) {
  return DepthImage(spec, side, std::vector<float>(spec.pixel_count(), value));
}

DepthPair::DepthPair(DepthImage top, DepthImage bottom, double thickness_epsilon)
    : top_(std::move(top)), bottom_(std::move(bottom)), eps_(thickness_epsilon) {
  if (!(top_.spec() == bottom_.spec())) throw Error(ErrorCode::MismatchedSpecs, "top and bottom grids differ");
  if (top_.side() != Side::Top || bottom_.side() != Side::Bottom)
    throw Error(ErrorCode::InvariantViolation, "pair sides swapped");
  if (!(eps_ >= 0.0)) throw Error(ErrorCode::InvariantViolation, "thickness epsilon must be non-negative");
}

DepthPair DepthPair::empty(const GridSpec& spec) {
  return DepthPair(DepthImage::empty(spec, Side::Top), DepthImage::empty(spec, Side::Bottom));
}

ThicknessMap pair_thickness(const DepthPair& pair) {
  const auto& s = pair.spec();
  ThicknessMap t(s.width, s.height, 0.0);
  for (std::size_t j = 0; j < s.height; ++j)
    for (std::size_t i = 0; i < s.width; ++i)
      if (pair.is_solid(i, j)) t(i, j) = pair.raw_thickness(i, j);
  return t;
}

ThicknessMap pair_thickness(const DepthImage& top, const DepthImage& bottom) {
  if (!(top.spec() == bottom.spec())) throw Error(ErrorCode::MismatchedSpecs, "top and bottom grids differ");
  return pair_thickness(DepthPair(top, bottom));
}

namespace {

void check_sample_shape(const GridSpec& spec, std::size_t n) {
  if (n != kSampleChannels * spec.pixel_count())
    throw Error(ErrorCode::ShapeMismatch, "sample holds " + std::to_string(n) + " values, expected " +
                                              std::to_string(kSampleChannels * spec.pixel_count()));
}

// Maps a depth-channel value to unit range and back, per normalization.
double depth_to_unit(double v, Norm n, double gap) {
  switch (n) {
    case Norm::Raw: return v / gap;
    case Norm::UnitRange: return v;
    case Norm::Symmetric: return (v + 1.0) * 0.5;
  }
  return v;
}
double unit_to_depth(double u, Norm n, double gap) {
  switch (n) {
    case Norm::Raw: return u * gap;
    case Norm::UnitRange: return u;
    case Norm::Symmetric: return 2.0 * u - 1.0;
  }
  return u;
}
// The edge channel is 0/1 in Raw and UnitRange, -1/1 in Symmetric.
double edge_to_unit(double v, Norm n) { return n == Norm::Symmetric ? (v + 1.0) * 0.5 : v; }
double unit_to_edge(double u, Norm n) { return n == Norm::Symmetric ? 2.0 * u - 1.0 : u; }

}  // namespace

DepthSample::DepthSample(const GridSpec& spec, Norm norm, std::vector<float> data)
    : spec_(spec), norm_(norm), data_(std::move(data)) {
  spec_.validate();
  check_sample_shape(spec_, data_.size());
  for (std::size_t k = 0; k < data_.size(); ++k)
    if (!std::isfinite(data_[k])) throw Error(ErrorCode::NonFiniteValue, "sample value at index " + std::to_string(k));
}

DepthSample DepthSample::to(Norm target) const {
  if (target == norm_) return *this;
  const double gap = spec_.gap();
  const std::size_t n = spec_.pixel_count();
  std::vector<float> out(data_.size());
  for (std::size_t c = 0; c < kSampleChannels; ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      const double v = data_[c * n + k];
      double r;
      if (c == kEdgeChannel)
        r = unit_to_edge(edge_to_unit(v, norm_), target);
      else
        r = unit_to_depth(depth_to_unit(v, norm_, gap), target, gap);
      out[c * n + k] = static_cast<float>(r);
    }
  }
  return DepthSample(spec_, target, std::move(out));
}

void DepthSample::validate() const {
  const std::size_t n = spec_.pixel_count();
  float lo = 0.0f, hi = 1.0f;
  if (norm_ == Norm::Raw) hi = DepthImage::sentinel(spec_);
  if (norm_ == Norm::Symmetric) lo = -1.0f;
  for (std::size_t c = 0; c < kSampleChannels; ++c) {
    const float elo = norm_ == Norm::Symmetric ? -1.0f : 0.0f;
    const float ehi = 1.0f;
    for (std::size_t k = 0; k < n; ++k) {
      const float v = data_[c * n + k];
      const bool ok = c == kEdgeChannel ? (v >= elo && v <= ehi) : (v >= lo && v <= hi);
      if (!ok)
        throw Error(ErrorCode::InvariantViolation,
                    "channel " + std::to_string(c) + " value " + std::to_string(v) + " out of range");
    }
  }
}

DepthSample raw_sample(const DepthPair& pair, std::span<const float> edges) {
  const std::size_t n = pair.spec().pixel_count();
  if (edges.size() != n) throw Error(ErrorCode::ShapeMismatch, "edge grid size differs from pair grid");
  std::vector<float> data(kSampleChannels * n);
  std::copy(pair.top().data().begin(), pair.top().data().end(), data.begin());
  std::copy(pair.bottom().data().begin(), pair.bottom().data().end(), data.begin() + n);
  std::copy(edges.begin(), edges.end(), data.begin() + 2 * n);
  return DepthSample(pair.spec(), Norm::Raw, std::move(data));
}

DepthPair sample_to_pair(const DepthSample& sample, double thickness_epsilon) {
  const DepthSample raw = sample.to(Norm::Raw);
  const auto& spec = raw.spec();
  const float hi = DepthImage::sentinel(spec);
  const std::size_t n = spec.pixel_count();
  std::vector<float> top(n), bottom(n);
  for (std::size_t k = 0; k < n; ++k) {
    top[k] = std::clamp(raw.data()[k], 0.0f, hi);
    bottom[k] = std::clamp(raw.data()[n + k], 0.0f, hi);
  }
  return DepthPair(DepthImage(spec, Side::Top, std::move(top)), DepthImage(spec, Side::Bottom, std::move(bottom)),
                   thickness_epsilon);
}

std::vector<PairIssue> check_pair(const DepthPair& pair) {
  std::vector<PairIssue> issues;
  const auto& s = pair.spec();
  for (std::size_t j = 0; j < s.height; ++j) {
    for (std::size_t i = 0; i < s.width; ++i) {
      if (pair.is_one_sided_miss(i, j))
        issues.push_back({i, j, "one-sided miss"});
      else if (!pair.top().is_miss(i, j) && pair.raw_thickness(i, j) < -pair.epsilon_absolute())
        issues.push_back({i, j, "inverted column"});
    }
  }
  return issues;
}

}  // namespace moldgen
