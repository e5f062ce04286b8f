#include "moldgen/ddpm/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "moldgen/error.hpp"
#include "moldgen/parallel.hpp"

namespace moldgen::ddpm {

double oracle_predict_noise(double x, int t, const NoiseSchedule& schedule, double mu, double sigma0) {
  const double ab = schedule.alpha_bar(t);
  return std::sqrt(1.0 - ab) * (x - std::sqrt(ab) * mu) / (ab * sigma0 * sigma0 + 1.0 - ab);
}

GaussianOracleDenoiser::GaussianOracleDenoiser(const NoiseSchedule& schedule, std::vector<double> mu, double sigma0)
    : schedule_(schedule), mu_(std::move(mu)), sigma0_(sigma0) {
  if (mu_.empty()) throw Error(ErrorCode::ShapeMismatch, "oracle mean is empty");
  if (!(sigma0_ >= 0.0)) throw Error(ErrorCode::BadRange, "oracle scale must be non-negative");
}

void GaussianOracleDenoiser::predict_noise(std::span<const float> x, int t, std::span<float> out) const {
  if (out.size() != x.size() || (mu_.size() != 1 && mu_.size() != x.size()))
    throw Error(ErrorCode::ShapeMismatch, "oracle input size differs from its mean");
  const double ab = schedule_.alpha_bar(t);
  const double sa = std::sqrt(ab), sn = std::sqrt(1.0 - ab), den = ab * sigma0_ * sigma0_ + 1.0 - ab;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double mu = mu_.size() == 1 ? mu_[0] : mu_[k];
    out[k] = static_cast<float>(sn * (x[k] - sa * mu) / den);
  }
}

void fill_normal(Rng& rng, std::span<float> out) {
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& v : out) v = static_cast<float>(nd(rng));
}

Noised forward_diffuse(std::span<const float> x0, int t, const NoiseSchedule& schedule, Rng& rng) {
  const double ab = schedule.alpha_bar(t);
  const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
  Noised r{Tensor(x0.size()), Tensor(x0.size())};
  fill_normal(rng, r.eps);
  for (std::size_t k = 0; k < x0.size(); ++k) r.x_t[k] = static_cast<float>(a * x0[k] + b * r.eps[k]);
  return r;
}

Tensor transition(std::span<const float> x_s, int s, int t, const NoiseSchedule& schedule, Rng& rng) {
  if (s < 0 || s >= t) throw Error(ErrorCode::StepOutOfRange, "transition needs 0 <= s < t");
  const double ratio = schedule.alpha_bar(t) / (s == 0 ? 1.0 : schedule.alpha_bar(s));
  const double a = std::sqrt(ratio), b = std::sqrt(1.0 - ratio);
  Tensor eps(x_s.size()), out(x_s.size());
  fill_normal(rng, eps);
  for (std::size_t k = 0; k < x_s.size(); ++k) out[k] = static_cast<float>(a * x_s[k] + b * eps[k]);
  return out;
}

Tensor reverse_step_with(std::span<const float> x_t, int t, std::span<const float> eps_hat, std::span<const float> z,
                         const NoiseSchedule& schedule, double sigma_scale) {
  if (eps_hat.size() != x_t.size() || (t > 1 && z.size() != x_t.size()))
    throw Error(ErrorCode::ShapeMismatch, "noise estimate size differs from x_t");
  const double coef = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
  const double inv = 1.0 / std::sqrt(schedule.alpha(t));
  const double sigma = t > 1 ? schedule.sigma(t) * sigma_scale : 0.0;
  Tensor out(x_t.size());
  for (std::size_t k = 0; k < x_t.size(); ++k) {
    double v = inv * (x_t[k] - coef * eps_hat[k]);
    if (sigma != 0.0) v += sigma * z[k];
    out[k] = static_cast<float>(v);
  }
  return out;
}

Tensor reverse_step(std::span<const float> x_t, int t, const Denoiser& denoiser, const NoiseSchedule& schedule,
                    Rng& rng) {
  const Tensor eps = denoiser.predict_noise(x_t, t);
  Tensor z;
  if (t > 1) {
    z.resize(x_t.size());
    fill_normal(rng, z);
  }
  return reverse_step_with(x_t, t, eps, z, schedule);
}

std::vector<Tensor> sample_tensors(const Denoiser& denoiser, const NoiseSchedule& schedule, std::size_t size,
                                   std::uint64_t seed, std::size_t count, std::size_t threads) {
  if (denoiser.input_size() != 0 && denoiser.input_size() != size)
    throw Error(ErrorCode::ShapeMismatch, "sample size differs from denoiser input");
  std::vector<Tensor> out(count);
  parallel_for(
      count,
      [&](std::size_t k) {
        Rng rng(seed + k);
        Tensor x(size);
        fill_normal(rng, x);
        for (int t = schedule.steps(); t >= 1; --t) x = reverse_step(x, t, denoiser, schedule, rng);
        out[k] = std::move(x);
      },
      threads);
  return out;
}

std::vector<DepthSample> sample(const Denoiser& denoiser, const NoiseSchedule& schedule, const GridSpec& spec,
                                std::uint64_t seed, std::size_t count, std::size_t threads) {
  auto xs = sample_tensors(denoiser, schedule, kSampleChannels * spec.pixel_count(), seed, count, threads);
  std::vector<DepthSample> out;
  out.reserve(count);
  for (auto& x : xs) {
    for (auto& v : x) v = std::clamp(v, -1.0f, 1.0f);
    out.emplace_back(spec, Norm::Symmetric, std::move(x));
  }
  return out;
}

TrainReport train(const std::vector<DepthSample>& data, MlpDenoiser& mlp, const NoiseSchedule& schedule,
                  const TrainOptions& opts) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no training samples");
  if (opts.batch == 0) throw Error(ErrorCode::BadRange, "batch size must be positive");
  std::vector<Tensor> xs;
  xs.reserve(data.size());
  for (const auto& s : data) {
    if (!(s.spec() == data.front().spec())) throw Error(ErrorCode::ShapeMismatch, "samples have differing grids");
    const DepthSample sym = s.to(Norm::Symmetric);
    xs.emplace_back(sym.data().begin(), sym.data().end());
    if (xs.back().size() != mlp.input_size())
      throw Error(ErrorCode::ShapeMismatch, "sample size " + std::to_string(xs.back().size()) +
                                                " differs from MLP input " + std::to_string(mlp.input_size()));
  }

  using Matrix = MlpDenoiser::Matrix;
  using Vector = MlpDenoiser::Vector;
  Rng rng(opts.seed);
  std::uniform_int_distribution<int> step(1, schedule.steps());
  Vector velocity = Vector::Zero(static_cast<Eigen::Index>(mlp.parameter_count()));
  const float lr = static_cast<float>(opts.lr), mom = static_cast<float>(opts.momentum);

  TrainReport report;
  report.parameters = mlp.parameter_count();
  std::ostringstream desc;
  desc << (opts.momentum > 0.0 ? "sgd-momentum" : "sgd") << " lr=" << opts.lr << " momentum=" << opts.momentum
       << " batch=" << opts.batch;
  report.optimizer = desc.str();

  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t d = mlp.input_size();
  for (std::uint32_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += opts.batch) {
      const std::size_t nb = std::min<std::size_t>(opts.batch, order.size() - b0);
      std::vector<Noised> noised;
      std::vector<std::span<const float>> inputs;
      std::vector<int> ts;
      noised.reserve(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const int t = step(rng);
        noised.push_back(forward_diffuse(xs[order[b0 + k]], t, schedule, rng));
        ts.push_back(t);
      }
      for (const auto& n : noised) inputs.emplace_back(n.x_t);
      const Matrix in = mlp.make_input(inputs, ts);
      Matrix target(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(nb));
      for (std::size_t k = 0; k < nb; ++k)
        for (std::size_t i = 0; i < d; ++i)
          target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = noised[k].eps[i];
      Vector grad;
      const float loss = mlp.loss(in, target, &grad);
      if (!std::isfinite(loss) || !grad.allFinite())
        throw Error(ErrorCode::NonFiniteLoss, "loss diverged in epoch " + std::to_string(epoch + 1));
      velocity = mom * velocity + grad;
      mlp.parameters() -= lr * velocity;
      sum += loss;
      ++batches;
      ++report.steps;
    }
    report.epoch_loss.push_back(sum / static_cast<double>(batches));
  }
  return report;
}

std::string report_csv(const TrainReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,loss\n";
  for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) os << e + 1 << ',' << report.epoch_loss[e] << '\n';
  return os.str();
}

void write_report_csv(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  f << report_csv(report);
}

}  // namespace moldgen::ddpm
