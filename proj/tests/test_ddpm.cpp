#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include "moldgen/ddpm/checkpoint.hpp"
#include "moldgen/ddpm/denoiser.hpp"
#include "moldgen/ddpm/diffusion.hpp"
#include "moldgen/ddpm/mlp.hpp"
#include "moldgen/ddpm/schedule.hpp"
#include "moldgen/error.hpp"

using namespace moldgen;
using namespace moldgen::ddpm;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Unsupported;
}

struct Moments {
  double mean = 0.0, var = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size() - 1);
  return m;
}

std::vector<DepthSample> constant_data(const GridSpec& s, std::size_t n, float value) {
  return std::vector<DepthSample>(n, DepthSample(s, Norm::UnitRange, std::vector<float>(3 * s.pixel_count(), value)));
}

}  // namespace

TEST_CASE("schedule values") {
  const auto one = make_schedule(1, 0.02, 0.02);
  CHECK(one.alpha_bar(1) == doctest::Approx(0.98).epsilon(1e-15));
  const auto big = make_schedule(1000, 1e-4, 0.02);
  CHECK(big.alpha_bar(1000) < 1e-4);
  CHECK(big.beta(1) == doctest::Approx(1e-4));
  CHECK(big.beta(1000) == doctest::Approx(0.02));
  for (int t = 2; t <= 1000; ++t) CHECK(big.alpha_bar(t) < big.alpha_bar(t - 1));
  CHECK(big.alpha_bar(1) < 1.0);
  for (int t = 1; t <= 1000; ++t) CHECK(big.sigma(t) * big.sigma(t) == doctest::Approx(big.beta(t)));
  const auto post = make_schedule(100, 1e-3, 0.05, VarianceRule::Posterior);
  CHECK(post.sigma(1) == 0.0);
  const double expect = post.beta(50) * (1 - post.alpha_bar(49)) / (1 - post.alpha_bar(50));
  CHECK(post.sigma(50) * post.sigma(50) == doctest::Approx(expect));
}

TEST_CASE("schedule errors") {
  CHECK(code_of([] { make_schedule(0, 1e-4, 0.02); }) == ErrorCode::BadRange);
  CHECK(code_of([] { make_schedule(10, 0.0, 0.02); }) == ErrorCode::BadRange);
  CHECK(code_of([] { make_schedule(10, 0.03, 0.02); }) == ErrorCode::BadRange);
  CHECK(code_of([] { make_schedule(10, 0.01, 1.0); }) == ErrorCode::BadRange);
  const auto s = make_schedule(10, 1e-3, 0.02);
  CHECK(code_of([&] { s.beta(0); }) == ErrorCode::StepOutOfRange);
  CHECK(code_of([&] { s.alpha_bar(11); }) == ErrorCode::StepOutOfRange);
  Rng rng(1);
  const Tensor x(4, 0.0f);
  CHECK(code_of([&] { forward_diffuse(x, 11, s, rng); }) == ErrorCode::StepOutOfRange);
}

TEST_CASE("default beta range scales with T") {
  const auto [b0, b1] = default_beta_range(1000);
  CHECK(b0 == doctest::Approx(1e-4));
  CHECK(b1 == doctest::Approx(0.02));
  const auto [c0, c1] = default_beta_range(100);
  CHECK(c0 == doctest::Approx(1e-3));
  CHECK(c1 == doctest::Approx(0.2));
  CHECK(default_beta_range(10).second < 1.0);
}

TEST_CASE("forward diffusion without noise keeps x0") {
  const auto s = make_schedule(5, 1e-12, 1e-12);
  Rng rng(3);
  const Tensor x0 = {0.3f, -0.7f, 1.0f};
  const auto n = forward_diffuse(x0, 5, s, rng);
  for (std::size_t k = 0; k < 3; ++k) CHECK(n.x_t[k] == doctest::Approx(x0[k]).epsilon(1e-5));
}

TEST_CASE("forward diffusion moments and determinism") {
  const auto s = make_schedule(100, 1e-3, 0.2);
  const Tensor x0(100000, 0.5f);
  for (int t : {1, 30, 100}) {
    Rng rng(7 + t);
    const auto n = forward_diffuse(x0, t, s, rng);
    std::vector<double> v(n.x_t.begin(), n.x_t.end());
    const auto m = moments(v);
    const double var = 1.0 - s.alpha_bar(t);
    const double se_mean = std::sqrt(var / v.size());
    CHECK(std::abs(m.mean - std::sqrt(s.alpha_bar(t)) * 0.5) < 3 * se_mean);
    CHECK(std::abs(m.var - var) < 3 * var * std::sqrt(2.0 / v.size()));
    for (std::size_t k = 0; k < 10; ++k)
      CHECK(n.x_t[k] == doctest::Approx(std::sqrt(s.alpha_bar(t)) * 0.5 + std::sqrt(var) * n.eps[k]).epsilon(1e-5));
    Rng again(7 + t);
    const auto n2 = forward_diffuse(x0, t, s, again);
    CHECK(n2.x_t == n.x_t);
    CHECK(n2.eps == n.eps);
  }
}

TEST_CASE("two-step transition matches the direct marginal") {
  const auto s = make_schedule(50, 1e-3, 0.1);
  const Tensor x0(100000, -0.4f);
  Rng rng(21);
  const auto xs = forward_diffuse(x0, 10, s, rng).x_t;
  const auto xt = transition(xs, 10, 40, s, rng);
  const auto m = moments(std::vector<double>(xt.begin(), xt.end()));
  const double var = 1.0 - s.alpha_bar(40);
  CHECK(std::abs(m.mean - std::sqrt(s.alpha_bar(40)) * -0.4) < 3 * std::sqrt(var / 1e5));
  CHECK(std::abs(m.var - var) < 3 * var * std::sqrt(2.0 / 1e5));
}

TEST_CASE("reverse step algebra") {
  const auto s = make_schedule(10, 1e-3, 0.05);
  Rng rng(5);
  Tensor x0(1000);
  fill_normal(rng, x0);
  const auto n = forward_diffuse(x0, 1, s, rng);
  const Tensor zero(x0.size(), 0.0f);
  const auto back = reverse_step_with(n.x_t, 1, n.eps, zero, s, 0.0);
  for (std::size_t k = 0; k < x0.size(); ++k) CHECK(std::abs(back[k] - x0[k]) <= 1e-6 * std::max(1.0f, std::abs(x0[k])) + 1e-6);

  const Tensor x = {1.0f, -2.0f};
  const Tensor z2(2, 0.0f);
  const auto r = reverse_step_with(x, 7, z2, z2, s);
  CHECK(r[0] == doctest::Approx(1.0 / std::sqrt(s.alpha(7))));
  CHECK(r[1] == doctest::Approx(-2.0 / std::sqrt(s.alpha(7))));
}

TEST_CASE("oracle noise estimate") {
  const auto s = make_schedule(100, 1e-3, 0.05);
  const int t = 40;
  const double ab = s.alpha_bar(t);
  CHECK(oracle_predict_noise(std::sqrt(ab) * 0.3, t, s, 0.3, 0.7) == doctest::Approx(0.0));
  CHECK(oracle_predict_noise(0.9, t, s, 0.3, 0.0) == doctest::Approx((0.9 - std::sqrt(ab) * 0.3) / std::sqrt(1 - ab)));
  CHECK(code_of([&] { oracle_predict_noise(0.0, 0, s, 0.0, 1.0); }) == ErrorCode::StepOutOfRange);

  // Regression check: the oracle beats every perturbed affine predictor.
  const double mu = 0.2, s0 = 0.6;
  Rng rng(9);
  std::normal_distribution<double> nd;
  std::vector<double> xt(200000), eps(200000);
  for (std::size_t k = 0; k < xt.size(); ++k) {
    const double x0 = mu + s0 * nd(rng);
    eps[k] = nd(rng);
    xt[k] = std::sqrt(ab) * x0 + std::sqrt(1 - ab) * eps[k];
  }
  auto risk = [&](auto f) {
    double r = 0.0;
    for (std::size_t k = 0; k < xt.size(); ++k) r += (eps[k] - f(xt[k])) * (eps[k] - f(xt[k]));
    return r / static_cast<double>(xt.size());
  };
  const double best = risk([&](double x) { return oracle_predict_noise(x, t, s, mu, s0); });
  const double a = std::sqrt(1 - ab) / (ab * s0 * s0 + 1 - ab);
  const double b = -a * std::sqrt(ab) * mu;
  for (double da : {-0.05, 0.05})
    for (double db : {-0.05, 0.0, 0.05}) CHECK(best < risk([&](double x) { return (a + da) * x + b + db; }));
  CHECK(best < risk([&](double x) { return a * x + b + 0.05; }));
}

TEST_CASE("oracle reverse chain reproduces the data law") {
  for (int T : {10, 100, 1000}) {
    const auto [b0, b1] = default_beta_range(T);
    const auto s = make_schedule(T, b0, b1);
    const GaussianOracleDenoiser oracle(s, 0.0, 1.0);
    std::vector<double> v;
    for (const auto& chain : sample_tensors(oracle, s, 1, 100, 10000)) v.push_back(chain[0]);
    const auto m = moments(v);
    CHECK(std::abs(m.mean) < 0.05);
    CHECK(m.var > 0.9);
    CHECK(m.var < 1.1);
  }
}

TEST_CASE("single step with a point mass collapses to the mean") {
  const auto s = make_schedule(1, 0.02, 0.02);
  const GaussianOracleDenoiser oracle(s, {0.25, -0.5, 0.75}, 0.0);
  for (const auto& x : sample_tensors(oracle, s, 3, 4, 50)) {
    CHECK(std::abs(x[0] - 0.25) < 1e-3);
    CHECK(std::abs(x[1] + 0.5) < 1e-3);
    CHECK(std::abs(x[2] - 0.75) < 1e-3);
  }
}

TEST_CASE("sampling is deterministic and thread independent") {
  const auto s = make_schedule(20, 1e-3, 0.1);
  const GaussianOracleDenoiser oracle(s, 0.1, 0.5);
  const auto a = sample_tensors(oracle, s, 16, 77, 6, 1);
  CHECK(sample_tensors(oracle, s, 16, 77, 6, 1) == a);
  CHECK(sample_tensors(oracle, s, 16, 77, 6, 3) == a);
  CHECK(sample_tensors(oracle, s, 16, 78, 6, 1) != a);
  const GridSpec g = GridSpec::square(2);
  for (const auto& d : sample(oracle, s, g, 3, 2)) {
    CHECK(d.norm() == Norm::Symmetric);
    for (float v : d.data()) CHECK((v >= -1.0f && v <= 1.0f));
  }
}

TEST_CASE("mlp gradient matches finite differences") {
  BasicMlp<double> mlp({6, {7, 5}, 4}, 3);
  Rng rng(4);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (Eigen::Index k = 0; k < mlp.parameters().size(); ++k) mlp.parameters()[k] = nd(rng);
  std::vector<std::vector<float>> xs(3, std::vector<float>(6));
  for (auto& x : xs)
    for (auto& v : x) v = static_cast<float>(nd(rng));
  const auto in = mlp.make_input({xs[0], xs[1], xs[2]}, {1, 5, 9});
  BasicMlp<double>::Matrix target(6, 3);
  for (Eigen::Index k = 0; k < target.size(); ++k) target.data()[k] = nd(rng);
  BasicMlp<double>::Vector g;
  mlp.loss(in, target, &g);
  REQUIRE(g.size() == static_cast<Eigen::Index>(mlp.parameter_count()));
  double worst = 0.0;
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double keep = mlp.parameters()[k];
    mlp.parameters()[k] = keep + h;
    const double up = mlp.loss(in, target);
    mlp.parameters()[k] = keep - h;
    const double down = mlp.loss(in, target);
    mlp.parameters()[k] = keep;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[k]) / std::max({std::abs(fd), std::abs(g[k]), 1e-8}));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("mlp shape handling") {
  MlpDenoiser mlp({12, {16}, 8}, 1);
  CHECK(mlp.parameter_count() == (20 * 16 + 16) + (16 * 12 + 12));
  const Tensor x(12, 0.3f);
  // Last layer starts at zero.
  for (float v : mlp.predict_noise(x, 3)) CHECK(v == 0.0f);
  const Tensor wrong(5, 0.0f);
  CHECK(code_of([&] { mlp.predict_noise(wrong, 1); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([] { MlpDenoiser({4, {8}, 3}, 1); }) == ErrorCode::BadRange);
}

TEST_CASE("training") {
  const GridSpec g = GridSpec::square(4);
  const auto s = make_schedule(20, 1e-3, 0.2);
  const auto data = constant_data(g, 8, 0.75f);

  SUBCASE("tiny mlp learns constant data") {
    MlpDenoiser mlp({48, {64}, 16}, 5);
    TrainOptions o;
    o.epochs = 200;
    o.batch = 4;
    o.seed = 2;
    const auto r = train(data, mlp, s, o);
    REQUIRE(r.epoch_loss.size() == 200);
    CHECK(r.last() < 0.5 * r.first());
    CHECK(r.parameters == mlp.parameter_count());
    CHECK(r.steps == 400);
    CHECK_FALSE(r.optimizer.empty());

    MlpDenoiser again({48, {64}, 16}, 5);
    CHECK(train(data, again, s, o).epoch_loss == r.epoch_loss);
    CHECK(again.parameters() == mlp.parameters());
  }
  SUBCASE("zero learning rate keeps the curve flat") {
    MlpDenoiser mlp({48, {32}, 8}, 5);
    const auto before = mlp.parameters();
    TrainOptions o;
    o.epochs = 5;
    o.lr = 0.0;
    const auto r = train(constant_data(g, 1, 0.75f), mlp, make_schedule(1, 0.02, 0.02), o);
    // Fresh noise every epoch, so the curve only stays flat in expectation.
    CHECK(mlp.parameters() == before);
    for (double v : r.epoch_loss) CHECK(std::isfinite(v));
  }
  SUBCASE("errors") {
    MlpDenoiser mlp({48, {8}, 8}, 5);
    CHECK(code_of([&] { train({}, mlp, s, {}); }) == ErrorCode::EmptyDataset);
    const auto other = constant_data(GridSpec::square(3), 2, 0.5f);
    CHECK(code_of([&] { train(other, mlp, s, {}); }) == ErrorCode::ShapeMismatch);
    TrainOptions o;
    o.lr = 1e6;
    o.epochs = 50;
    CHECK(code_of([&] { train(data, mlp, s, o); }) == ErrorCode::NonFiniteLoss);
  }
}

TEST_CASE("report csv") {
  TrainReport r;
  r.epoch_loss = {0.5, 0.25};
  const auto text = report_csv(r);
  CHECK(text.find("epoch,loss") == 0);
  CHECK(text.find("2,0.25") != std::string::npos);
}

TEST_CASE("checkpoint round trip") {
  const GridSpec g = GridSpec::square(4, 0.3, -0.3);
  Model m{make_schedule(30, 1e-3, 0.1, VarianceRule::Posterior), g, MlpDenoiser({48, {16, 12}, 8}, 9)};
  m.mlp.parameters().setRandom();
  std::stringstream ss;
  save_checkpoint(ss, m);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "DDPM");
  std::istringstream in(bytes);
  const Model back = load_checkpoint(in);
  CHECK(back.spec == g);
  CHECK(back.schedule.steps() == 30);
  CHECK(back.schedule.rule() == VarianceRule::Posterior);
  CHECK(back.schedule.alpha_bar(30) == m.schedule.alpha_bar(30));
  CHECK(back.mlp.layer_dims() == m.mlp.layer_dims());
  CHECK(back.mlp.parameters() == m.mlp.parameters());
  const Tensor x(48, 0.1f);
  CHECK(back.mlp.predict_noise(x, 4) == m.mlp.predict_noise(x, 4));

  std::string bad = bytes;
  bad[0] = 'X';
  std::istringstream b(bad);
  CHECK(code_of([&] { load_checkpoint(b); }) == ErrorCode::BadMagic);
  std::istringstream c(bytes.substr(0, bytes.size() - 10));
  CHECK(code_of([&] { load_checkpoint(c); }) == ErrorCode::TruncatedPayload);
}
