#include "moldgen/canny.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "moldgen/error.hpp"

namespace moldgen {

namespace {

std::size_t clamp_index(long long k, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<long long>(k, 0, static_cast<long long>(n) - 1));
}

}  // namespace

Grid2<double> gaussian_blur(const FloatGrid& image, double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) throw Error(ErrorCode::BadRange, "sigma must be non-negative");
  const std::size_t w = image.width, h = image.height;
  Grid2<double> out(w, h);
  for (std::size_t k = 0; k < image.values.size(); ++k) out.values[k] = image.values[k];
  if (sigma == 0.0) return out;

  const auto radius = static_cast<long long>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (long long k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
    sum += kernel[k + radius];
  }
  for (auto& v : kernel) v /= sum;

  Grid2<double> tmp(w, h);
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      double acc = 0.0;
      for (long long k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * out(clamp_index(static_cast<long long>(i) + k, w), j);
      tmp(i, j) = acc;
    }
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      double acc = 0.0;
      for (long long k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * tmp(i, clamp_index(static_cast<long long>(j) + k, h));
      out(i, j) = acc;
    }
  return out;
}

Gradient sobel_gradient(const Grid2<double>& img) {
  const std::size_t w = img.width, h = img.height;
  Gradient g{Grid2<double>(w, h), Grid2<std::uint8_t>(w, h)};
  auto at = [&](long long i, long long j) { return img(clamp_index(i, w), clamp_index(j, h)); };
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      const auto x = static_cast<long long>(i), y = static_cast<long long>(j);
      const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
      const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
      g.magnitude(i, j) = std::sqrt(gx * gx + gy * gy);
      double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (deg < 0.0) deg += 180.0;
      std::uint8_t bin = 0;
      if (deg >= 22.5 && deg < 67.5)
        bin = 1;
      else if (deg >= 67.5 && deg < 112.5)
        bin = 2;
      else if (deg >= 112.5 && deg < 157.5)
        bin = 3;
      g.direction(i, j) = bin;
    }
  return g;
}

Grid2<double> non_maximum_suppression(const Gradient& g) {
  static constexpr int kStep[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  const std::size_t w = g.magnitude.width, h = g.magnitude.height;
  Grid2<double> out(w, h, 0.0);
  auto mag = [&](long long i, long long j) {
    if (i < 0 || j < 0 || i >= static_cast<long long>(w) || j >= static_cast<long long>(h)) return 0.0;
    return g.magnitude(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      const double m = g.magnitude(i, j);
      if (m <= 0.0) continue;
      const auto& d = kStep[g.direction(i, j)];
      const auto x = static_cast<long long>(i), y = static_cast<long long>(j);
      // Strict against the backward neighbour, non-strict forward: a plateau
      // across a step keeps exactly one pixel.
      if (m > mag(x - d[0], y - d[1]) && m >= mag(x + d[0], y + d[1])) out(i, j) = m;
    }
  return out;
}

FloatGrid canny(const FloatGrid& image, const CannyParams& params) {
  if (!(params.low > 0.0) || !(params.low < params.high))
    throw Error(ErrorCode::BadThresholds, "need 0 < low < high");
  for (float v : image.values)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "canny input must be finite");
  const std::size_t w = image.width, h = image.height;
  const Grid2<double> thin = non_maximum_suppression(sobel_gradient(gaussian_blur(image, params.sigma)));

  FloatGrid edges(w, h, 0.0f);
  std::vector<std::size_t> stack;
  for (std::size_t k = 0; k < thin.values.size(); ++k)
    if (thin.values[k] >= params.high) {
      edges.values[k] = 1.0f;
      stack.push_back(k);
    }
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    const auto i = static_cast<long long>(k % w), j = static_cast<long long>(k / w);
    for (long long dj = -1; dj <= 1; ++dj)
      for (long long di = -1; di <= 1; ++di) {
        const long long x = i + di, y = j + dj;
        if (x < 0 || y < 0 || x >= static_cast<long long>(w) || y >= static_cast<long long>(h)) continue;
        const std::size_t n = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
        if (edges.values[n] == 0.0f && thin.values[n] >= params.low) {
          edges.values[n] = 1.0f;
          stack.push_back(n);
        }
      }
  }
  return edges;
}

FloatGrid unit_depths(const DepthImage& img) {
  const auto& s = img.spec();
  FloatGrid g(s.width, s.height);
  const double gap = s.gap();
  for (std::size_t k = 0; k < g.values.size(); ++k) g.values[k] = static_cast<float>(img.data()[k] / gap);
  return g;
}

DepthSample make_sample(const DepthPair& pair, const CannyParams& params, EdgeCombine combine) {
  (void)combine;  // MaxOfSides is the only rule
  const FloatGrid top = unit_depths(pair.top());
  const FloatGrid bottom = unit_depths(pair.bottom());
  const FloatGrid et = canny(top, params);
  const FloatGrid eb = canny(bottom, params);
  const std::size_t n = pair.spec().pixel_count();
  std::vector<float> data(kSampleChannels * n);
  for (std::size_t k = 0; k < n; ++k) {
    data[k] = top.values[k];
    data[n + k] = bottom.values[k];
    data[2 * n + k] = std::max(et.values[k], eb.values[k]);
  }
  return DepthSample(pair.spec(), Norm::UnitRange, std::move(data));
}

}  // namespace moldgen
