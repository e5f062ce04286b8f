#include "moldgen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "moldgen/error.hpp"
#include "moldgen/grid_io.hpp"
#include "moldgen/mesh_io.hpp"
#include "moldgen/parallel.hpp"
#include "moldgen/reconstruct.hpp"
#include "moldgen/scan.hpp"

namespace moldgen {

Normalized normalize_mesh(const TriangleMesh& mesh, const GridSpec& spec, double margin) {
  if (mesh.empty()) throw Error(ErrorCode::EmptyMesh, "cannot normalize an empty mesh");
  if (!(margin >= 0.0 && margin < 0.5)) throw Error(ErrorCode::BadRange, "margin must lie in [0, 0.5)");
  const Aabb& b = mesh.bounds();
  const Vec3 ext = b.extent();
  const double target[3] = {spec.width * spec.cell_size, spec.height * spec.cell_size, spec.gap()};
  double scale = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a)
    if (ext[a] > 0.0) scale = std::min(scale, (1.0 - 2.0 * margin) * target[a] / ext[a]);
  if (!std::isfinite(scale)) scale = 1.0;
  const Vec3 from = b.center();
  const Vec3 to{spec.x_min + 0.5 * target[0], spec.y_min + 0.5 * target[1], 0.5 * (spec.z_top + spec.z_bottom)};
  Normalized out;
  out.scale = scale;
  out.translation = to - from;
  out.mesh = transformed(mesh, [&](const Vec3& p) { return (p - from) * scale + to; });
  return out;
}

bool Manifest::admits(const std::string& name) const {
  if (keep) return std::find(keep->begin(), keep->end(), name) != keep->end();
  return std::find(skip.begin(), skip.end(), name) == skip.end();
}

Manifest parse_manifest(const std::string& text) {
  Manifest m;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "manifest must be a JSON object");
    if (doc.contains("keep")) m.keep = doc.at("keep").get<std::vector<std::string>>();
    if (doc.contains("skip")) m.skip = doc.at("skip").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_manifest(ss.str());
}

void write_pack(const std::filesystem::path& out, const std::vector<DepthSample>& samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyOutput, "nothing to pack");
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + out.string());
  const auto n = static_cast<std::uint32_t>(samples.size());
  const char b[4] = {static_cast<char>(n & 0xff), static_cast<char>((n >> 8) & 0xff), static_cast<char>((n >> 16) & 0xff),
                     static_cast<char>((n >> 24) & 0xff)};
  f.write(b, 4);
  for (const auto& s : samples) {
    if (!(s.spec() == samples.front().spec())) throw Error(ErrorCode::MismatchedSpecs, "pack samples differ in grid");
    encode_grid(s, f, true);
  }
  if (!f) throw Error(ErrorCode::IoFailure, "write failed: " + out.string());
  std::ofstream side(sidecar_path(out));
  side << spec_to_json(samples.front().spec());
}

std::vector<DepthSample> read_pack(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  unsigned char b[4];
  if (!f.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::TruncatedPayload, "pack shorter than its count");
  const std::uint32_t n = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  std::optional<GridSpec> spec;
  if (std::ifstream side(sidecar_path(path)); side) {
    std::stringstream ss;
    ss << side.rdbuf();
    spec = spec_from_json(ss.str());
  }
  std::vector<DepthSample> out;
  out.reserve(n);
  for (std::uint32_t k = 0; k < n; ++k) {
    auto v = decode_grid(f, spec);
    if (!std::holds_alternative<DepthSample>(v))
      throw Error(ErrorCode::ParseError, "pack record " + std::to_string(k) + " is not a three-channel sample");
    out.push_back(std::get<DepthSample>(std::move(v)));
  }
  return out;
}

PackReport pack_dataset(const std::filesystem::path& dir, const Manifest& manifest, const GridSpec& spec,
                        const CannyParams& canny_params, const std::filesystem::path& out, double margin) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoFailure, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".stl" || ext == ".obj") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  PackReport report;
  report.spec = spec;
  std::vector<fs::path> todo;
  for (const auto& p : files) {
    const std::string name = p.filename().string();
    if (manifest.admits(name)) todo.push_back(p);
    else report.skipped.push_back(name);
  }

  struct Outcome {
    std::optional<DepthSample> sample;
    std::string error;
  };
  std::vector<Outcome> results(todo.size());
  parallel_for(todo.size(), [&](std::size_t k) {
    try {
      const TriangleMesh mesh = load_mesh(todo[k]);
      const auto norm = normalize_mesh(mesh, spec, margin);
      ScanOptions so;
      so.threads = 1;
      const DepthPair pair = scan_mesh(norm.mesh, spec, so);
      results[k].sample = make_sample(pair, canny_params);
    } catch (const std::exception& e) {
      results[k].error = e.what();
    }
  });

  std::vector<DepthSample> samples;
  for (std::size_t k = 0; k < todo.size(); ++k) {
    const std::string name = todo[k].filename().string();
    if (results[k].sample) {
      samples.push_back(std::move(*results[k].sample));
      report.kept.push_back(name);
    } else {
      report.failed.emplace_back(name, results[k].error);
    }
  }
  if (samples.empty()) throw Error(ErrorCode::EmptyOutput, "no mesh in " + dir.string() + " could be packed");
  write_pack(out, samples);
  return report;
}

namespace {

// Depths are kept on a 1/256 lattice so every value is exact in float and
// survives the reconstruct/scan round trip bit for bit.
double quantize(double v) { return std::round(v * 256.0) / 256.0; }

struct Design {
  std::size_t w, h;
  std::vector<double> top, bottom;  // depths; sentinel where empty
  std::vector<bool> solid;
  std::size_t at(std::size_t i, std::size_t j) const { return j * w + i; }
};

Design design_member(std::size_t w, std::size_t h, double gap, std::mt19937_64& rng) {
  Design d{w, h, std::vector<double>(w * h, gap), std::vector<double>(w * h, gap), std::vector<bool>(w * h, false)};
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](std::size_t a, std::size_t b) { return std::uniform_int_distribution<std::size_t>(a, b)(rng); };

  const std::size_t x0 = pick(1, w / 4), x1 = pick(3 * w / 4, w - 2);
  const std::size_t y0 = pick(1, h / 4), y1 = pick(3 * h / 4, h - 2);
  const double plate_bottom = quantize(gap * uni(0.3, 0.4));
  const double plate_top = quantize(gap * uni(0.45, 0.52));
  for (std::size_t j = y0; j <= y1; ++j)
    for (std::size_t i = x0; i <= x1; ++i) {
      d.top[d.at(i, j)] = plate_top;
      d.bottom[d.at(i, j)] = plate_bottom;
      d.solid[d.at(i, j)] = true;
    }

  const std::size_t ribs = pick(1, 3);
  for (std::size_t r = 0; r < ribs; ++r) {
    const double rise = quantize(gap * uni(0.08, 0.25));
    if (pick(0, 1) == 0) {
      const std::size_t j = pick(y0, y1);
      for (std::size_t i = x0; i <= x1; ++i) d.top[d.at(i, j)] = std::min(d.top[d.at(i, j)], plate_top - rise);
    } else {
      const std::size_t i = pick(x0, x1);
      for (std::size_t j = y0; j <= y1; ++j) d.top[d.at(i, j)] = std::min(d.top[d.at(i, j)], plate_top - rise);
    }
  }
  const std::size_t bosses = pick(0, 2);
  for (std::size_t b = 0; b < bosses; ++b) {
    const double rise = quantize(gap * uni(0.15, 0.35));
    const std::size_t i = pick(x0, x1 - 1), j = pick(y0, y1 - 1);
    for (std::size_t dj = 0; dj < 2; ++dj)
      for (std::size_t di = 0; di < 2; ++di)
        d.top[d.at(i + di, j + dj)] = std::min(d.top[d.at(i + di, j + dj)], plate_top - rise);
  }
  const std::size_t pockets = pick(0, 2);
  for (std::size_t p = 0; p < pockets; ++p) {
    const std::size_t i = pick(x0 + 1, x1 - 2), j = pick(y0 + 1, y1 - 2);
    const double depth = quantize((gap - plate_top - plate_bottom) * uni(0.25, 0.6));
    for (std::size_t dj = 0; dj < 2; ++dj)
      for (std::size_t di = 0; di < 2; ++di) d.bottom[d.at(i + di, j + dj)] = plate_bottom + depth;
  }
  return d;
}

DepthPair design_pair(const Design& d, const GridSpec& spec, std::size_t factor) {
  const std::size_t n = spec.pixel_count();
  const float miss = DepthImage::sentinel(spec);
  std::vector<float> top(n, miss), bottom(n, miss);
  for (std::size_t j = 0; j < spec.height; ++j)
    for (std::size_t i = 0; i < spec.width; ++i) {
      const std::size_t c = d.at(i / factor, j / factor);
      if (!d.solid[c]) continue;
      top[spec.index(i, j)] = static_cast<float>(d.top[c]);
      bottom[spec.index(i, j)] = static_cast<float>(d.bottom[c]);
    }
  return DepthPair(DepthImage(spec, Side::Top, std::move(top)), DepthImage(spec, Side::Bottom, std::move(bottom)));
}

}  // namespace

std::vector<CorpusMember> synth_corpus(std::size_t n, std::uint64_t seed, const GridSpec& spec) {
  if (n == 0) throw Error(ErrorCode::BadRange, "corpus size must be at least 1");
  spec.validate();
  // Design cells of `factor` pixels, aiming for a 32×32 lattice.
  std::size_t factor = 1;
  while (spec.width % (factor * 2) == 0 && spec.height % (factor * 2) == 0 && spec.width / (factor * 2) >= 32 &&
         spec.height / (factor * 2) >= 32)
    factor *= 2;
  const std::size_t w = spec.width / factor, h = spec.height / factor;
  if (w < 8 || h < 8) throw Error(ErrorCode::BadRange, "grid too small for the synthetic corpus");
  GridSpec coarse = spec;
  coarse.width = static_cast<std::uint32_t>(w);
  coarse.height = static_cast<std::uint32_t>(h);
  coarse.cell_size = spec.cell_size * static_cast<double>(factor);

  std::vector<CorpusMember> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::mt19937_64 rng(seed + k);
    const Design d = design_member(w, h, spec.gap(), rng);
    const DepthPair coarse_pair = design_pair(d, coarse, 1);
    char name[32];
    std::snprintf(name, sizeof name, "bracket_%03zu", k);
    out.push_back({name, reconstruct_solid(coarse_pair, ReconstructMode::Block), design_pair(d, spec, factor)});
  }
  return out;
}

}  // namespace moldgen
