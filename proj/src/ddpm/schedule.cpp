#include "moldgen/ddpm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moldgen/error.hpp"

namespace moldgen::ddpm {

NoiseSchedule::NoiseSchedule(std::vector<double> beta, VarianceRule rule, double beta_start, double beta_end)
    : beta_(std::move(beta)), rule_(rule), beta_start_(beta_start), beta_end_(beta_end) {
  const std::size_t n = beta_.size();
  if (n == 0) throw Error(ErrorCode::BadRange, "schedule needs at least one step");
  alpha_.resize(n);
  alpha_bar_.resize(n);
  sigma_.resize(n);
  double prod = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(beta_[k] > 0.0 && beta_[k] < 1.0)) throw Error(ErrorCode::BadRange, "beta must lie in (0, 1)");
    alpha_[k] = 1.0 - beta_[k];
    prod *= alpha_[k];
    alpha_bar_[k] = prod;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double prev = k == 0 ? 1.0 : alpha_bar_[k - 1];
    const double var = rule_ == VarianceRule::Beta ? beta_[k] : beta_[k] * (1.0 - prev) / (1.0 - alpha_bar_[k]);
    sigma_[k] = std::sqrt(var);
  }
}

std::size_t NoiseSchedule::check(int t) const {
  if (t < 1 || t > steps())
    throw Error(ErrorCode::StepOutOfRange, "step " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
  return static_cast<std::size_t>(t - 1);
}

NoiseSchedule make_schedule(int steps, double beta_start, double beta_end, VarianceRule rule) {
  if (steps < 1) throw Error(ErrorCode::BadRange, "T must be at least 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw Error(ErrorCode::BadRange, "need 0 < beta_start <= beta_end < 1");
  std::vector<double> beta(static_cast<std::size_t>(steps));
  for (int t = 1; t <= steps; ++t) {
    const double f = steps == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(steps - 1);
    beta[t - 1] = beta_start + (beta_end - beta_start) * f;
  }
  return NoiseSchedule(std::move(beta), rule, beta_start, beta_end);
}

std::pair<double, double> default_beta_range(int steps) {
  const double scale = 1000.0 / static_cast<double>(std::max(1, steps));
  return {std::min(1e-4 * scale, 0.5), std::min(0.02 * scale, 0.999)};
}

}  // namespace moldgen::ddpm
