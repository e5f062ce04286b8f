#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace moldgen::ddpm {

enum class VarianceRule : std::uint32_t {
  Beta = 0,       // σ_t² = β_t
  Posterior = 1,  // σ_t² = β_t (1 − ᾱ_{t−1}) / (1 − ᾱ_t)
};

/// Fixed diffusion schedule. Steps are 1-based: t ∈ [1, T].
class NoiseSchedule {
 public:
  NoiseSchedule(std::vector<double> beta, VarianceRule rule, double beta_start, double beta_end);

  int steps() const { return static_cast<int>(beta_.size()); }
  double beta(int t) const { return beta_[check(t)]; }
  double alpha(int t) const { return alpha_[check(t)]; }
  double alpha_bar(int t) const { return alpha_bar_[check(t)]; }
  /// ᾱ_{t−1}, with ᾱ_0 = 1.
  double alpha_bar_prev(int t) const { return t == 1 ? 1.0 : alpha_bar(t - 1); }
  double sigma(int t) const { return sigma_[check(t)]; }

  VarianceRule rule() const { return rule_; }
  double beta_start() const { return beta_start_; }
  double beta_end() const { return beta_end_; }

 private:
  std::size_t check(int t) const;

  std::vector<double> beta_, alpha_, alpha_bar_, sigma_;
  VarianceRule rule_;
  double beta_start_, beta_end_;
};

/// Linear β from beta_start to beta_end. Throws BadRange unless T ≥ 1 and
/// 0 < beta_start ≤ beta_end < 1.
NoiseSchedule make_schedule(int steps, double beta_start, double beta_end, VarianceRule rule = VarianceRule::Beta);

/// The common [1e-4, 0.02] range at T = 1000, scaled by 1000/T for shorter
/// chains so that ᾱ_T stays near zero (capped below 1).
std::pair<double, double> default_beta_range(int steps);

}  // namespace moldgen::ddpm
