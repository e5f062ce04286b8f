#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "moldgen/ddpm/schedule.hpp"

namespace moldgen::ddpm {

using Tensor = std::vector<float>;

/// ε-prediction network interface. Implementations are pure: the output
/// depends only on (x_t, t) and fixed parameters.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  /// Number of elements expected per input; 0 accepts any size.
  virtual std::size_t input_size() const = 0;

  /// Writes ε̂(x_t, t) into `out` (same size as x). Throws ShapeMismatch.
  virtual void predict_noise(std::span<const float> x, int t, std::span<float> out) const = 0;

  Tensor predict_noise(std::span<const float> x, int t) const {
    Tensor out(x.size());
    predict_noise(x, t, out);
    return out;
  }
};

/// ε̂ = √(1−ᾱ)(x − √ᾱ μ) / (ᾱσ₀² + 1 − ᾱ), elementwise, in double.
/// Throws StepOutOfRange.
double oracle_predict_noise(double x, int t, const NoiseSchedule& schedule, double mu, double sigma0);

/// Bayes-optimal noise estimate for data x₀ ~ N(μ, σ₀² I). A scalar μ is
/// broadcast over any input size.
class GaussianOracleDenoiser final : public Denoiser {
 public:
  GaussianOracleDenoiser(const NoiseSchedule& schedule, std::vector<double> mu, double sigma0);
  GaussianOracleDenoiser(const NoiseSchedule& schedule, double mu, double sigma0)
      : GaussianOracleDenoiser(schedule, std::vector<double>{mu}, sigma0) {}

  std::size_t input_size() const override { return mu_.size() == 1 ? 0 : mu_.size(); }
  void predict_noise(std::span<const float> x, int t, std::span<float> out) const override;
  using Denoiser::predict_noise;

 private:
  const NoiseSchedule& schedule_;
  std::vector<double> mu_;
  double sigma0_;
};

}  // namespace moldgen::ddpm
