// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "moldgen/canny.hpp"
#include "moldgen/cli.hpp"
#include "moldgen/dataset.hpp"
#include "moldgen/ddpm/diffusion.hpp"
#include "moldgen/ddpm/mlp.hpp"
#include "moldgen/error.hpp"
#include "moldgen/mesh_io.hpp"
#include "moldgen/postprocess.hpp"
#include "moldgen/reconstruct.hpp"
#include "moldgen/scan.hpp"
#include "moldgen/validate.hpp"
#include "shapes.hpp"

using namespace moldgen;
namespace fs = std::filesystem;
namespace ts = testing_shapes;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path work_dir() {
  const fs::path d = fs::temp_directory_path() / "moldgen_acceptance";
  fs::create_directories(d);
  return d;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::fprintf(stderr, "  cli %s -> %d: %s\n", args.front().c_str(), code, err.str().c_str());
  return code;
}

// 1. Default grid constants survive scan -> info.
Outcome grid_constants() {
  const fs::path dir = work_dir() / "c1";
  fs::create_directories(dir);
  save_mesh(ts::box({-0.3, -0.3, -0.2}, {0.3, 0.3, 0.2}), dir / "cube.stl");
  if (cli({"scan", (dir / "cube.stl").string(), "-o", (dir / "p.dgrd").string()}) != 0) return {false, "scan failed"};
  std::string text;
  if (cli({"info", (dir / "p.dgrd").string()}, &text) != 0) return {false, "info failed"};
  const bool grid = text.find("grid: 256 x 256\n") != std::string::npos;
  const bool top = text.find("z_top: 0.40000000000000002\n") != std::string::npos;
  const bool bot = text.find("z_bottom: -0.40000000000000002\n") != std::string::npos;
  const GridSpec d;
  const bool defaults = d.width == 256 && d.height == 256 && d.z_top == 0.4 && d.z_bottom == -0.4;
  return {grid && top && bot && defaults, fmt("info grid %s, z_top %s, z_bottom %s", grid ? "256x256" : "wrong",
                                              top ? "0.4" : "wrong", bot ? "-0.4" : "wrong")};
}

// 2. Meshes with overhangs become z-monotone after scan + reconstruct.
Outcome overhang_elimination() {
  const GridSpec spec;
  const auto corpus = synth_corpus(50, 2024, spec);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t pass = 0, had_overhang = 0, max_cross = 0;
  for (const auto& m : corpus) {
    // Pick a solid pixel and stand a mushroom on the top surface there.
    std::size_t i = 0, j = 0;
    do {
      i = static_cast<std::size_t>(u(rng) * spec.width);
      j = static_cast<std::size_t>(u(rng) * spec.height);
    } while (!m.pair.is_solid(i, j));
    const double z0 = spec.z_top - m.pair.top().at(i, j) - 0.01;
    const double room = spec.z_top - 0.01 - z0;
    const double rs = 0.02 + 0.03 * u(rng), rc = rs + 0.03 + 0.06 * u(rng);
    const TriangleMesh mush =
        ts::mushroom({spec.center_x(i), spec.center_y(j), z0}, rs, rc, room * (0.5 + 0.2 * u(rng)), room * 0.95);
    const TriangleMesh input = merged(m.mesh, mush);
    if (!monotone_z_check(input, 10000).pass) ++had_overhang;
    const auto out = reconstruct_solid(scan_mesh(input, spec));
    const auto r = monotone_z_check(out, 10000);
    max_cross = std::max(max_cross, r.max_crossings);
    if (r.pass && out.is_closed()) ++pass;
  }
  return {pass == 50 && had_overhang == 50,
          fmt("%zu/50 pass, %zu/50 inputs had overhangs, max crossings %zu", pass, had_overhang, max_cross)};
}

std::vector<DepthPair> random_pairs() {
  static std::vector<DepthPair> pairs = [] {
    std::vector<DepthPair> v;
    std::mt19937_64 rng(12345);
    for (int k = 0; k < 100; ++k) v.push_back(ts::random_pair(GridSpec::square(128), rng));
    return v;
  }();
  return pairs;
}

// 3. scan(reconstruct(D)) == D.
Outcome round_trip() {
  double worst = 0.0;
  std::size_t exact = 0, closed = 0;
  for (const auto& d : random_pairs()) {
    const auto mesh = reconstruct_solid(d, ReconstructMode::Block);
    closed += mesh.is_closed() && mesh.is_consistently_oriented();
    const auto back = scan_mesh(mesh, d.spec());
    double e = 0.0;
    for (std::size_t j = 0; j < d.spec().height; ++j)
      for (std::size_t i = 0; i < d.spec().width; ++i) {
        e = std::max(e, std::abs(static_cast<double>(back.top().at(i, j)) - d.top().at(i, j)));
        e = std::max(e, std::abs(static_cast<double>(back.bottom().at(i, j)) - d.bottom().at(i, j)));
      }
    worst = std::max(worst, e);
    exact += e <= 1e-9;
  }
  return {exact == 100 && closed == 100,
          fmt("%zu/100 within 1e-9 (max abs error %.3g), %zu/100 closed", exact, worst, closed)};
}

// 4. Signed volume equals the column sum.
Outcome volume_identity() {
  double worst = 0.0;
  std::size_t ok = 0;
  for (const auto& d : random_pairs()) {
    const auto t = pair_thickness(d);
    double sum = 0.0;
    for (double v : t.values) sum += v;
    const double cell2 = d.spec().cell_size * d.spec().cell_size;
    const double expect = sum * cell2;
    const double got = signed_volume(reconstruct_solid(d, ReconstructMode::Block));
    const double rel = std::abs(got - expect) / expect;
    worst = std::max(worst, rel);
    ok += rel < 1e-9;
  }
  return {ok == 100, fmt("%zu/100 within 1e-9 relative (max %.3g)", ok, worst)};
}

// 5. BVH scan equals brute force; large mesh timing.
Outcome scan_vs_brute() {
  std::vector<TriangleMesh> meshes;
  for (int l = 1; l <= 3; ++l) meshes.push_back(ts::icosphere({0.03 * l, -0.02 * l, 0.01}, 0.2 + 0.04 * l, l));
  meshes.push_back(ts::icosphere({-0.1, 0.1, 0.0}, 0.3, 0));
  for (int k = 0; k < 5; ++k)
    meshes.push_back(ts::torus_x({0.01 * k, 0.013 * k, -0.01 * k}, 0.2 + 0.01 * k, 0.05 + 0.01 * k, 24 + 8 * k, 12 + 4 * k));
  for (int k = 0; k < 4; ++k)
    meshes.push_back(ts::mushroom({0.05 * k - 0.1, 0.02 * k, -0.35}, 0.08 + 0.02 * k, 0.2 + 0.05 * k, 0.3, 0.6, 16 + 8 * k));
  for (const auto& m : synth_corpus(7, 555, GridSpec::square(64))) meshes.push_back(m.mesh);
  const GridSpec spec = GridSpec::square(128);
  std::size_t equal = 0, max_tris = 0;
  for (const auto& m : meshes) {
    max_tris = std::max(max_tris, m.triangle_count());
    ScanOptions brute;
    brute.brute_force = true;
    equal += scan_mesh(m, spec) == scan_mesh(m, spec, brute);
  }
  // Laid flat so that most pixels see the surface.
  const TriangleMesh big = transformed(ts::torus_x({0.0, 0.0, 0.0}, 0.3, 0.12, 250, 100),
                                       [](const Vec3& p) { return Vec3{p.z, p.y, -p.x}; });
  const auto t0 = std::chrono::steady_clock::now();
  const auto pair = scan_mesh(big, GridSpec{});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool sane = scan_stats(pair).solid_pixels > 0;
  return {equal == meshes.size() && max_tris <= 5000 && big.triangle_count() == 50000 && secs < 5.0 && sane,
          fmt("%zu/%zu equal (largest %zu triangles); %zu-triangle scan at 256^2 in %.2f s", equal, meshes.size(),
              max_tris, big.triangle_count(), secs)};
}

// 6. Forward marginal variance.
Outcome forward_law() {
  const int T = 100;
  const auto [b0, b1] = ddpm::default_beta_range(T);
  const auto sched = ddpm::make_schedule(T, b0, b1);
  const std::size_t n = 100000;
  const std::vector<float> x0(n, 0.0f);
  ddpm::Rng rng(6);
  bool ok = true;
  std::string detail;
  for (int t : {1, T / 2, T}) {
    const auto r = ddpm::forward_diffuse(x0, t, sched, rng);
    double s2 = 0.0;
    for (float v : r.x_t) s2 += static_cast<double>(v) * v;
    s2 /= static_cast<double>(n);
    const double var = 1.0 - sched.alpha_bar(t);
    const double se = var * std::sqrt(2.0 / static_cast<double>(n));
    const double z = (s2 - var) / se;
    ok &= std::abs(z) < 3.0;
    detail += fmt("t=%d var %.5g vs %.5g (%.2f se); ", t, s2, var, z);
  }
  return {ok, detail};
}

// 7. Reverse chain with the Gaussian oracle reproduces N(0, 1).
Outcome reverse_dynamics() {
  const int T = 100;
  const auto [b0, b1] = ddpm::default_beta_range(T);
  const auto sched = ddpm::make_schedule(T, b0, b1);
  const ddpm::GaussianOracleDenoiser oracle(sched, 0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto xs = ddpm::sample_tensors(oracle, sched, 1, 700, 10000);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double m = 0.0, v = 0.0;
  for (const auto& x : xs) m += x[0];
  m /= static_cast<double>(xs.size());
  for (const auto& x : xs) v += (x[0] - m) * (x[0] - m);
  v /= static_cast<double>(xs.size() - 1);
  return {std::abs(m) <= 0.05 && v >= 0.9 && v <= 1.1 && secs < 60.0,
          fmt("mean %.4f, variance %.4f over %zu chains in %.2f s", m, v, xs.size(), secs)};
}

// 8. Analytic gradients against central differences.
Outcome gradient_check() {
  ddpm::MlpConfig cfg{12, {10, 9}, 8};
  ddpm::BasicMlp<double> mlp(cfg, 8);
  std::mt19937_64 rng(88);
  std::normal_distribution<double> nd(0.0, 1.0);
  // Nonzero last layer so every parameter has a live gradient.
  for (Eigen::Index k = 0; k < mlp.parameters().size(); ++k) mlp.parameters()[k] = 0.4 * nd(rng);
  const std::size_t batch = 5;
  std::vector<std::vector<float>> xs(batch, std::vector<float>(12));
  std::vector<int> tsteps;
  for (auto& x : xs)
    for (auto& v : x) v = static_cast<float>(nd(rng));
  for (std::size_t k = 0; k < batch; ++k) tsteps.push_back(1 + static_cast<int>(k * 7));
  std::vector<std::span<const float>> spans(xs.begin(), xs.end());
  const auto in = mlp.make_input(spans, tsteps);
  ddpm::BasicMlp<double>::Matrix target(12, static_cast<Eigen::Index>(batch));
  for (Eigen::Index r = 0; r < target.rows(); ++r)
    for (Eigen::Index c = 0; c < target.cols(); ++c) target(r, c) = nd(rng);
  ddpm::BasicMlp<double>::Vector grad;
  mlp.loss(in, target, &grad);

  const double h = 1e-5;
  std::uniform_int_distribution<Eigen::Index> pick(0, mlp.parameters().size() - 1);
  std::set<Eigen::Index> chosen;
  while (chosen.size() < 150) chosen.insert(pick(rng));
  double worst = 0.0;
  for (auto k : chosen) {
    const double keep = mlp.parameters()[k];
    mlp.parameters()[k] = keep + h;
    const double lp = mlp.loss(in, target);
    mlp.parameters()[k] = keep - h;
    const double lm = mlp.loss(in, target);
    mlp.parameters()[k] = keep;
    const double fd = (lp - lm) / (2.0 * h);
    const double rel = std::abs(fd - grad[k]) / std::max({std::abs(fd), std::abs(grad[k]), 1e-8});
    worst = std::max(worst, rel);
  }
  return {worst < 1e-4, fmt("max relative error %.3g over %zu of %zu parameters", worst, chosen.size(),
                            mlp.parameter_count())};
}

std::vector<DepthSample> toy_data() {
  std::vector<DepthSample> data;
  for (const auto& m : synth_corpus(32, 7, GridSpec::square(16))) data.push_back(make_sample(m.pair).to(Norm::Symmetric));
  return data;
}

// 9. Training smoke test and reproducibility.
Outcome training_smoke() {
  const auto data = toy_data();
  const int T = 50;
  const auto [b0, b1] = ddpm::default_beta_range(T);
  const auto sched = ddpm::make_schedule(T, b0, b1);
  ddpm::TrainOptions opts;
  opts.epochs = 400;
  opts.seed = 9;
  const auto t0 = std::chrono::steady_clock::now();
  ddpm::MlpDenoiser a({768, {1024}, 128}, 1), b({768, {1024}, 128}, 1);
  const auto ra = ddpm::train(data, a, sched, opts);
  const auto rb = ddpm::train(data, b, sched, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool same = ra.epoch_loss == rb.epoch_loss;
  const double ratio = ra.last() / ra.first();
  return {ratio < 0.5 && same && secs < 600.0,
          fmt("loss %.4f -> %.4f (ratio %.3f), curves %s, %.0f s for both runs", ra.first(), ra.last(), ratio,
              same ? "bit-identical" : "DIFFER", secs)};
}

// 10. CLI pipeline from meshes to generated, validated meshes.
Outcome generation_pipeline() {
  const fs::path dir = work_dir() / "c10";
  fs::remove_all(dir);
  fs::create_directories(dir / "meshes");
  for (const auto& m : synth_corpus(32, 7, GridSpec::square(16))) save_mesh(m.mesh, dir / "meshes" / (m.name + ".stl"));
  const std::string pack = (dir / "toy.pack").string(), model = (dir / "toy.ckpt").string();
  if (cli({"pack", (dir / "meshes").string(), "--grid", "16", "-o", pack}) != 0) return {false, "pack failed"};
  if (cli({"train", pack, "--T", "50", "--epochs", "300", "--seed", "10", "-o", model}) != 0)
    return {false, "train failed"};
  const fs::path out = dir / "gen";
  if (cli({"generate", model, "--count", "8", "--seed", "100", "-o", out.string()}) != 0)
    return {false, "generate failed"};
  std::size_t good = 0, found = 0;
  for (int k = 0; k < 8; ++k) {
    const fs::path f = out / fmt("gen_%03d.stl", k);
    if (!fs::exists(f)) continue;
    ++found;
    try {
      const auto m = load_mesh(f);
      good += m.is_closed() && m.is_consistently_oriented() && monotone_z_check(m, 10000).pass;
    } catch (const Error&) {
    }
  }
  return {good == 8, fmt("%zu/8 meshes written, %zu/8 closed, monotone and reloadable", found, good)};
}

// 11. Canny on a filled square plus hysteresis monotonicity.
Outcome canny_check() {
  const std::size_t n = 64, lo = 20, hi = 44;  // square covers [lo, hi)
  FloatGrid img(n, n, 0.0f);
  for (std::size_t j = lo; j < hi; ++j)
    for (std::size_t i = lo; i < hi; ++i) img(i, j) = 1.0f;
  const auto edges = canny(img);
  // True boundary: pixels on either side of the step.
  std::vector<std::pair<int, int>> boundary, found;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      bool b = false;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const long a = static_cast<long>(i) + di, c = static_cast<long>(j) + dj;
        if (a < 0 || c < 0 || a >= static_cast<long>(n) || c >= static_cast<long>(n)) continue;
        b |= img(static_cast<std::size_t>(a), static_cast<std::size_t>(c)) != img(i, j);
      }
      if (b) boundary.emplace_back(static_cast<int>(i), static_cast<int>(j));
      if (edges(i, j) > 0.5f) found.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  auto directed = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (auto [x, y] : from) {
      double best = 1e30;
      for (auto [u, v] : to) best = std::min(best, std::hypot(x - u, y - v));
      worst = std::max(worst, best);
    }
    return worst;
  };
  const double hd = found.empty() ? 1e30 : std::max(directed(found, boundary), directed(boundary, found));

  // Monotonicity on a scanned corpus member: raising either threshold never adds edges.
  const auto m = synth_corpus(1, 11, GridSpec::square(64)).front();
  const FloatGrid depth = unit_depths(m.pair.top());
  std::mt19937_64 rng(1111);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  std::size_t mono = 0;
  for (int k = 0; k < 50; ++k) {
    double l = u(rng), h = u(rng);
    if (l > h) std::swap(l, h);
    if (l == h) h += 0.01;
    const double l2 = l + (h - l) * u(rng) / 2.0, h2 = h + u(rng);
    const auto e1 = canny(depth, {1.0, l, h});
    const auto e2 = canny(depth, {1.0, l2, h2});
    bool subset = true;
    for (std::size_t q = 0; q < e1.values.size(); ++q) subset &= !(e2.values[q] > 0.5f && e1.values[q] < 0.5f);
    mono += subset;
  }
  return {hd <= 1.0 && mono == 50,
          fmt("Hausdorff %.3f px over %zu edge pixels; monotone %zu/50", hd, found.size(), mono)};
}

// 12. Voxel boolean volume and side-action flag.
Outcome boolean_holes() {
  const TriangleMesh slab = ts::box({-0.5, -0.5, -0.2}, {0.5, 0.5, 0.2});
  const auto z = subtract_holes(slab, {{Axis::Z, {0.0, 0.0, 0.0}, 0.1, true}}, 128);
  const double analytic = 0.4 * (1.0 - std::numbers::pi * 0.01);
  const double rel = std::abs(signed_volume(z.mesh) - analytic) / analytic;
  const bool zmold = monotone_z_check(z.mesh, 10000).pass;
  const auto y = subtract_holes(slab, {{Axis::Y, {0.0, 0.0, 0.0}, 0.1, true}}, 128);
  const auto rep = manufacturability_report(y.mesh, GridSpec{});
  return {rel < 0.02 && zmold && rep.side_action.required() && !rep.moldable,
          fmt("z-hole volume error %.3f%%, z-hole moldable %s; y-hole side action %s (x rays flagged %zu), moldable %s",
              100.0 * rel, zmold ? "yes" : "no", rep.side_action.required() ? "SET" : "unset", rep.side_action.x_flagged,
              rep.moldable ? "PASS" : "FAIL")};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion numbers on the command line restrict the run.
  std::set<std::size_t> only;
  for (int a = 1; a < argc; ++a) only.insert(static_cast<std::size_t>(std::atoi(argv[a])));
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"grid constants 256x256, z = +/-0.4", grid_constants},
      {"overhang elimination", overhang_elimination},
      {"round trip scan(reconstruct(D)) == D", round_trip},
      {"volume identity", volume_identity},
      {"BVH scan equals brute force, 50k scan < 5 s", scan_vs_brute},
      {"forward law variance", forward_law},
      {"reverse dynamics with Gaussian oracle", reverse_dynamics},
      {"MLP gradient check", gradient_check},
      {"training smoke", training_smoke},
      {"end-to-end generation", generation_pipeline},
      {"Canny edges and hysteresis monotonicity", canny_check},
      {"boolean holes", boolean_holes},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!only.empty() && !only.count(k + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
