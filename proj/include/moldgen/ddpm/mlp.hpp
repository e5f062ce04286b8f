#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "moldgen/ddpm/denoiser.hpp"
#include "moldgen/error.hpp"

namespace moldgen::ddpm {

struct MlpConfig {
  std::uint32_t input_dim = 0;       // flattened sample size D
  std::vector<std::uint32_t> hidden = {1024};
  std::uint32_t embed_dim = 128;     // sinusoidal features of t, even
};

/// Sinusoidal time features: sin(t·f_k), cos(t·f_k), f_k = 10000^(−k/(E/2)).
template <class Scalar>
void time_embedding(int t, std::uint32_t dim, Scalar* out) {
  const std::uint32_t half = dim / 2;
  for (std::uint32_t k = 0; k < half; ++k) {
    const double f = std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half));
    out[k] = static_cast<Scalar>(std::sin(t * f));
    out[half + k] = static_cast<Scalar>(std::cos(t * f));
  }
}

/// Fully connected ε-network: [x, emb(t)] → hidden layers (SiLU) → D.
/// Parameters live in one flat vector (per layer: W row-major, then b), so
/// the optimizer and finite-difference checks can address them uniformly.
template <class Scalar>
class BasicMlp final : public Denoiser {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// Activations of one batched forward pass, kept for backward().
  struct Cache {
    std::vector<Matrix> pre;  // z_l
    std::vector<Matrix> act;  // a_0 = input, a_l = silu(z_l)
  };

  BasicMlp(MlpConfig config, std::uint64_t seed) : config_(std::move(config)) {
    if (config_.input_dim == 0 || config_.embed_dim % 2 != 0)
      throw Error(ErrorCode::BadRange, "MLP needs a positive input size and an even embedding size");
    dims_.push_back(config_.input_dim + config_.embed_dim);
    for (auto h : config_.hidden) {
      if (h == 0) throw Error(ErrorCode::BadRange, "hidden width must be positive");
      dims_.push_back(h);
    }
    dims_.push_back(config_.input_dim);
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      offsets_.push_back(n);
      n += static_cast<std::size_t>(dims_[l]) * dims_[l + 1] + dims_[l + 1];
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(n));
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      // The last layer starts at zero so the first prediction is ε̂ = 0.
      if (l + 2 == dims_.size()) break;
      std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / dims_[l]));
      auto w = weight(l);
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<Scalar>(nd(rng));
    }
  }

  const MlpConfig& config() const { return config_; }
  const std::vector<std::uint32_t>& layer_dims() const { return dims_; }
  std::size_t layer_count() const { return dims_.size() - 1; }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }
  Vector& parameters() { return params_; }
  const Vector& parameters() const { return params_; }

  Eigen::Map<RowMajor> weight(std::size_t l) {
    return Eigen::Map<RowMajor>(params_.data() + offsets_[l], dims_[l + 1], dims_[l]);
  }
  Eigen::Map<const RowMajor> weight(std::size_t l) const {
    return Eigen::Map<const RowMajor>(params_.data() + offsets_[l], dims_[l + 1], dims_[l]);
  }
  Eigen::Map<Vector> bias(std::size_t l) {
    return Eigen::Map<Vector>(params_.data() + offsets_[l] + std::size_t{dims_[l]} * dims_[l + 1], dims_[l + 1]);
  }
  Eigen::Map<const Vector> bias(std::size_t l) const {
    return Eigen::Map<const Vector>(params_.data() + offsets_[l] + std::size_t{dims_[l]} * dims_[l + 1], dims_[l + 1]);
  }

  /// Column k of the returned matrix is the network input [x_k, emb(t_k)].
  Matrix make_input(const std::vector<std::span<const float>>& xs, const std::vector<int>& ts) const {
    const auto d = config_.input_dim;
    Matrix in(dims_[0], static_cast<Eigen::Index>(xs.size()));
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (xs[k].size() != d) throw Error(ErrorCode::ShapeMismatch, "input size differs from MLP input");
      for (std::uint32_t i = 0; i < d; ++i) in(i, static_cast<Eigen::Index>(k)) = static_cast<Scalar>(xs[k][i]);
      time_embedding<Scalar>(ts[k], config_.embed_dim, in.col(static_cast<Eigen::Index>(k)).data() + d);
    }
    return in;
  }

  Matrix forward(const Matrix& input, Cache* cache = nullptr) const {
    Matrix a = input;
    if (cache) {
      cache->pre.clear();
      cache->act.assign(1, input);
    }
    for (std::size_t l = 0; l < layer_count(); ++l) {
      Matrix z = weight(l) * a;
      z.colwise() += bias(l);
      const bool last = l + 1 == layer_count();
      if (last) {
        a = std::move(z);
        if (cache) cache->pre.push_back(a);
      } else {
        a = z.unaryExpr([](Scalar v) { return v / (Scalar(1) + std::exp(-v)); });
        if (cache) {
          cache->pre.push_back(std::move(z));
          cache->act.push_back(a);
        }
      }
    }
    return a;
  }

  /// Reverse pass for dL/d(output) = grad_out; returns dL/dθ in the flat layout.
  Vector backward(const Cache& cache, const Matrix& grad_out) const {
    Vector g = Vector::Zero(params_.size());
    Matrix dz = grad_out;
    for (std::size_t l = layer_count(); l-- > 0;) {
      const Matrix& a_prev = cache.act[l];
      Eigen::Map<RowMajor>(g.data() + offsets_[l], dims_[l + 1], dims_[l]) = dz * a_prev.transpose();
      Eigen::Map<Vector>(g.data() + offsets_[l] + std::size_t{dims_[l]} * dims_[l + 1], dims_[l + 1]) =
          dz.rowwise().sum();
      if (l == 0) break;
      Matrix da = weight(l).transpose() * dz;
      const Matrix& z = cache.pre[l - 1];
      dz = da.binaryExpr(z, [](Scalar d, Scalar v) {
        const Scalar s = Scalar(1) / (Scalar(1) + std::exp(-v));
        return d * s * (Scalar(1) + v * (Scalar(1) - s));
      });
    }
    return g;
  }

  /// Mean of (ε̂ − ε)² over every element of the batch.
  Scalar loss(const Matrix& input, const Matrix& target, Vector* grad = nullptr) const {
    Cache cache;
    const Matrix out = forward(input, grad ? &cache : nullptr);
    const Matrix diff = out - target;
    const Scalar n = static_cast<Scalar>(diff.size());
    if (grad) *grad = backward(cache, diff * (Scalar(2) / n));
    return diff.squaredNorm() / n;
  }

  std::size_t input_size() const override { return config_.input_dim; }

  void predict_noise(std::span<const float> x, int t, std::span<float> out) const override {
    if (x.size() != config_.input_dim || out.size() != x.size())
      throw Error(ErrorCode::ShapeMismatch, "sample size " + std::to_string(x.size()) + " differs from MLP input " +
                                                std::to_string(config_.input_dim));
    const Matrix y = forward(make_input({x}, {t}));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(y(static_cast<Eigen::Index>(i), 0));
  }
  using Denoiser::predict_noise;

 private:
  MlpConfig config_;
  std::vector<std::uint32_t> dims_;
  std::vector<std::size_t> offsets_;
  Vector params_;
};

using MlpDenoiser = BasicMlp<float>;

}  // namespace moldgen::ddpm
