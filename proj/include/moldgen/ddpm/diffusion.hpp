#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "moldgen/ddpm/denoiser.hpp"
#include "moldgen/ddpm/mlp.hpp"
#include "moldgen/ddpm/schedule.hpp"
#include "moldgen/depth.hpp"

namespace moldgen::ddpm {

using Rng = std::mt19937_64;

/// Standard normal draws in double, rounded to float.
void fill_normal(Rng& rng, std::span<float> out);

struct Noised {
  Tensor x_t;
  Tensor eps;
};

/// x_t = √ᾱ_t·x0 + √(1−ᾱ_t)·ε, ε ~ N(0, I) drawn from rng. Throws StepOutOfRange.
Noised forward_diffuse(std::span<const float> x0, int t, const NoiseSchedule& schedule, Rng& rng);

/// One draw from q(x_t | x_s) for s < t: √(ᾱ_t/ᾱ_s)·x_s + √(1 − ᾱ_t/ᾱ_s)·ε.
/// s = 0 means x_s = x0.
Tensor transition(std::span<const float> x_s, int s, int t, const NoiseSchedule& schedule, Rng& rng);

/// x_{t−1} = (x_t − β_t/√(1−ᾱ_t)·ε̂)/√α_t + σ_t·z, z = 0 at t = 1.
Tensor reverse_step(std::span<const float> x_t, int t, const Denoiser& denoiser, const NoiseSchedule& schedule,
                    Rng& rng);

/// Same update with the noise estimate and z supplied by the caller.
Tensor reverse_step_with(std::span<const float> x_t, int t, std::span<const float> eps_hat, std::span<const float> z,
                         const NoiseSchedule& schedule, double sigma_scale = 1.0);

/// `count` full reverse chains from x_T ~ N(0, I); chain k uses its own
/// generator seeded with seed + k, so results do not depend on threading.
std::vector<Tensor> sample_tensors(const Denoiser& denoiser, const NoiseSchedule& schedule, std::size_t size,
                                   std::uint64_t seed, std::size_t count, std::size_t threads = 0);

/// Chains over three-channel samples of `spec`, clamped to [−1, 1] and
/// returned in Symmetric norm.
std::vector<DepthSample> sample(const Denoiser& denoiser, const NoiseSchedule& schedule, const GridSpec& spec,
                                std::uint64_t seed, std::size_t count, std::size_t threads = 0);

struct TrainOptions {
  std::uint32_t epochs = 100;
  std::uint32_t batch = 8;
  double lr = 0.1;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean step loss per epoch
  std::size_t steps = 0;
  std::size_t parameters = 0;
  std::string optimizer;

  double first() const { return epoch_loss.empty() ? 0.0 : epoch_loss.front(); }
  double last() const { return epoch_loss.empty() ? 0.0 : epoch_loss.back(); }
};

/// ε-prediction training with SGD (with momentum when > 0). Each epoch
/// shuffles the data; every sample in a batch gets its own t ~ U{1..T} and
/// noise. Samples not in Symmetric norm are converted first.
/// Throws EmptyDataset, ShapeMismatch, NonFiniteLoss.
TrainReport train(const std::vector<DepthSample>& data, MlpDenoiser& mlp, const NoiseSchedule& schedule,
                  const TrainOptions& opts);

/// "epoch,loss" lines.
std::string report_csv(const TrainReport& report);
void write_report_csv(const std::filesystem::path& path, const TrainReport& report);

}  // namespace moldgen::ddpm
