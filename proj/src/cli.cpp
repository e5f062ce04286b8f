#include "moldgen/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "moldgen/canny.hpp"
#include "moldgen/dataset.hpp"
#include "moldgen/ddpm/checkpoint.hpp"
#include "moldgen/ddpm/diffusion.hpp"
#include "moldgen/error.hpp"
#include "moldgen/grid_io.hpp"
#include "moldgen/mesh_io.hpp"
#include "moldgen/postprocess.hpp"
#include "moldgen/preview.hpp"
#include "moldgen/reconstruct.hpp"
#include "moldgen/scan.hpp"
#include "moldgen/validate.hpp"

namespace moldgen::cli {

namespace fs = std::filesystem;

namespace {

struct GridFlags {
  std::uint32_t grid = 256;
  double ztop = 0.4, zbot = -0.4;

  void add(CLI::App* app) {
    app->add_option("--grid", grid, "pixels per side")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--ztop", ztop, "top plane z")->capture_default_str();
    app->add_option("--zbot", zbot, "bottom plane z")->capture_default_str();
  }
  GridSpec spec() const { return GridSpec::square(grid, ztop, zbot); }
};

FloatGrid channel_grid(const DepthSample& s, std::size_t c) {
  FloatGrid g(s.width(), s.height());
  const auto ch = s.channel(c);
  std::copy(ch.begin(), ch.end(), g.values.begin());
  return g;
}

void write_previews(const fs::path& prefix, const DepthSample& unit) {
  static const char* names[3] = {"_top.png", "_bottom.png", "_edge.png"};
  for (std::size_t c = 0; c < kSampleChannels; ++c) {
    FloatGrid g = channel_grid(unit, c);
    // Depth 0 (material right at the plane) is drawn bright.
    if (c != kEdgeChannel)
      for (auto& v : g.values) v = 1.0f - v;
    write_png_preview(prefix.string() + names[c], g);
  }
}

void print_spec(std::ostream& out, const GridSpec& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "grid: %u x %u\ncell_size: %.17g\nx_min: %.17g\ny_min: %.17g\nz_top: %.17g\nz_bottom: %.17g\n", s.width,
                s.height, s.cell_size, s.x_min, s.y_min, s.z_top, s.z_bottom);
  out << buf;
}

void print_pair_stats(std::ostream& out, const DepthPair& pair) {
  const ScanStats st = scan_stats(pair);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "solid_pixels: %zu\nthickness_min: %.9g\nthickness_mean: %.9g\nthickness_max: %.9g\n"
                "projected_area: %.9g\nvolume: %.9g\n",
                st.solid_pixels, st.min_thickness, st.mean_thickness, st.max_thickness, st.projected_area, st.volume);
  out << buf;
}

const char* norm_name(Norm n) {
  switch (n) {
    case Norm::Raw: return "raw";
    case Norm::UnitRange: return "unit";
    case Norm::Symmetric: return "symmetric";
  }
  return "?";
}

void info_mesh(std::ostream& out, const fs::path& path) {
  const auto r = load_mesh_report(path);
  const auto& m = r.mesh;
  char buf[512];
  const Aabb& b = m.bounds();
  std::snprintf(buf, sizeof buf,
                "kind: mesh\nvertices: %zu\ntriangles: %zu\nclosed: %s\noriented: %s\nedge_manifold: %s\n"
                "bounds: [%.9g, %.9g, %.9g] - [%.9g, %.9g, %.9g]\n",
                m.vertex_count(), m.triangle_count(), m.is_closed() ? "yes" : "no",
                m.is_consistently_oriented() ? "yes" : "no", m.is_edge_manifold() ? "yes" : "no", b.lo.x, b.lo.y, b.lo.z,
                b.hi.x, b.hi.y, b.hi.z);
  out << buf;
  if (m.is_closed() && m.is_consistently_oriented()) {
    std::snprintf(buf, sizeof buf, "volume: %.12g\n", signed_volume(m));
    out << buf;
  }
  if (r.dropped_degenerate) out << "dropped_degenerate: " << r.dropped_degenerate << '\n';
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
}

void info_grid(std::ostream& out, const fs::path& path) {
  const GridValue v = read_grid_file(path);
  if (const auto* img = std::get_if<DepthImage>(&v)) {
    out << "kind: depth image (" << (img->side() == Side::Top ? "top" : "bottom") << ")\n";
    print_spec(out, img->spec());
    return;
  }
  const auto& s = std::get<DepthSample>(v);
  out << "kind: sample\nchannels: 3\nnorm: " << norm_name(s.norm()) << '\n';
  print_spec(out, s.spec());
  print_pair_stats(out, sample_to_pair(s));
  std::size_t edges = 0;
  const auto edge = s.channel(kEdgeChannel);
  const float on = 1.0f;
  for (float e : edge) edges += e >= on;
  out << "edge_pixels: " << edges << '\n';
}

void info_checkpoint(std::ostream& out, const fs::path& path) {
  const auto m = ddpm::load_checkpoint(path);
  out << "kind: model\nT: " << m.schedule.steps() << "\nbeta_start: " << m.schedule.beta_start()
      << "\nbeta_end: " << m.schedule.beta_end()
      << "\nvariance_rule: " << (m.schedule.rule() == ddpm::VarianceRule::Beta ? "beta" : "posterior")
      << "\nlayers:";
  for (auto d : m.mlp.layer_dims()) out << ' ' << d;
  out << "\nembed_dim: " << m.mlp.config().embed_dim << "\nparameters: " << m.mlp.parameter_count() << '\n';
  print_spec(out, m.spec);
}

void info_pack(std::ostream& out, const fs::path& path) {
  const auto samples = read_pack(path);
  out << "kind: pack\nsamples: " << samples.size() << "\nshape: 3 x " << samples.front().height() << " x "
      << samples.front().width() << "\nnorm: " << norm_name(samples.front().norm()) << '\n';
  print_spec(out, samples.front().spec());
}

int info(std::ostream& out, const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  char head[8] = {};
  f.read(head, 8);
  const auto got = f.gcount();
  f.close();
  if (got >= 4 && std::memcmp(head, kGridMagic, 4) == 0) info_grid(out, path);
  else if (got >= 4 && std::memcmp(head, ddpm::kCheckpointMagic, 4) == 0) info_checkpoint(out, path);
  else if (got == 8 && std::memcmp(head + 4, kGridMagic, 4) == 0) info_pack(out, path);
  else info_mesh(out, path);
  return kExitOk;
}

std::vector<std::uint32_t> parse_widths(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const long v = std::stol(item);
      if (v <= 0) throw std::invalid_argument("width");
      out.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--hidden", "expected comma separated positive widths, got '" + text + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError("--hidden", "needs at least one width");
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth image pipeline for two-part moldable part generation", "moldgen"};
  app.require_subcommand(1);
  std::function<int()> action;

  // scan
  auto* scan = app.add_subcommand("scan", "depth pair of a mesh");
  std::string scan_in, scan_out, scan_png;
  GridFlags scan_grid;
  double scan_margin = kDefaultMargin;
  bool no_normalize = false;
  scan->add_option("mesh", scan_in, "STL or OBJ")->required();
  scan_grid.add(scan);
  scan->add_option("--margin", scan_margin, "normalization margin")->capture_default_str();
  scan->add_flag("--no-normalize", no_normalize, "scan the mesh where it is");
  scan->add_option("--png", scan_png, "write PNG previews with this prefix");
  scan->add_option("-o,--output", scan_out, "pair file (DGRD)")->required();
  scan->callback([&] {
    action = [&] {
      const GridSpec spec = scan_grid.spec();
      TriangleMesh mesh = load_mesh(scan_in);
      if (!no_normalize) mesh = normalize_mesh(mesh, spec, scan_margin).mesh;
      const auto r = scan_mesh_report(mesh, spec);
      for (const auto& w : r.warnings) err << "warning: " << w << '\n';
      write_pair_file(scan_out, r.pair);
      if (!scan_png.empty()) write_previews(scan_png, make_sample(r.pair));
      print_pair_stats(out, r.pair);
      return kExitOk;
    };
  });

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "solid mesh from a depth pair");
  std::string rec_in, rec_out, rec_mode = "block";
  rec->add_option("pair", rec_in, "pair or sample file (DGRD)")->required();
  rec->add_option("--mode", rec_mode, "block or smooth")->capture_default_str()->check(CLI::IsMember({"block", "smooth"}));
  rec->add_option("-o,--output", rec_out, "mesh file")->required();
  rec->callback([&] {
    action = [&] {
      const DepthPair pair = read_pair_file(rec_in);
      const auto mesh = reconstruct_solid(pair, rec_mode == "smooth" ? ReconstructMode::Smooth : ReconstructMode::Block);
      save_mesh(mesh, rec_out);
      out << "triangles: " << mesh.triangle_count() << "\nvolume: " << signed_volume(mesh) << '\n';
      return kExitOk;
    };
  });

  // edges
  auto* edg = app.add_subcommand("edges", "three channel sample with a Canny edge channel");
  std::string edg_in, edg_out, edg_png;
  CannyParams cp;
  edg->add_option("pair", edg_in, "pair file (DGRD)")->required();
  edg->add_option("--sigma", cp.sigma)->capture_default_str();
  edg->add_option("--low", cp.low)->capture_default_str();
  edg->add_option("--high", cp.high)->capture_default_str();
  edg->add_option("--png", edg_png, "write PNG previews with this prefix");
  edg->add_option("-o,--output", edg_out, "sample file (DGRD)")->required();
  edg->callback([&] {
    action = [&] {
      const DepthSample s = make_sample(read_pair_file(edg_in), cp);
      write_grid_file(edg_out, s);
      if (!edg_png.empty()) write_previews(edg_png, s);
      return kExitOk;
    };
  });

  // pack
  auto* pk = app.add_subcommand("pack", "scan a directory of meshes into a training pack");
  std::string pk_dir, pk_manifest, pk_out;
  GridFlags pk_grid;
  CannyParams pk_canny;
  double pk_margin = kDefaultMargin;
  pk->add_option("dir", pk_dir, "directory of STL/OBJ files")->required();
  pk->add_option("--manifest", pk_manifest, "keep/skip JSON");
  pk_grid.add(pk);
  pk->add_option("--margin", pk_margin)->capture_default_str();
  pk->add_option("--sigma", pk_canny.sigma)->capture_default_str();
  pk->add_option("--low", pk_canny.low)->capture_default_str();
  pk->add_option("--high", pk_canny.high)->capture_default_str();
  pk->add_option("-o,--output", pk_out, "pack file")->required();
  pk->callback([&] {
    action = [&] {
      const Manifest m = pk_manifest.empty() ? Manifest{} : read_manifest(pk_manifest);
      const auto r = pack_dataset(pk_dir, m, pk_grid.spec(), pk_canny, pk_out, pk_margin);
      out << "kept: " << r.kept.size() << "\nskipped: " << r.skipped.size() << "\nfailed: " << r.failed.size() << '\n';
      for (const auto& s : r.skipped) out << "  skipped " << s << '\n';
      for (const auto& [name, why] : r.failed) out << "  failed " << name << ": " << why << '\n';
      return kExitOk;
    };
  });

  // train
  auto* tr = app.add_subcommand("train", "fit the noise-prediction network on a pack");
  std::string tr_in, tr_out, tr_csv, tr_hidden = "1024", tr_rule = "beta";
  int tr_steps = 1000;
  std::uint64_t tr_seed = 0;
  std::uint32_t tr_embed = 128;
  std::optional<double> tr_b0, tr_b1;
  ddpm::TrainOptions topt;
  tr->add_option("pack", tr_in, "pack file")->required();
  tr->add_option("--T", tr_steps, "diffusion steps")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--beta-start", tr_b0, "default 1e-4 scaled by 1000/T");
  tr->add_option("--beta-end", tr_b1, "default 0.02 scaled by 1000/T");
  tr->add_option("--rule", tr_rule, "reverse variance: beta or posterior")
      ->capture_default_str()
      ->check(CLI::IsMember({"beta", "posterior"}));
  tr->add_option("--epochs", topt.epochs)->capture_default_str();
  tr->add_option("--batch", topt.batch)->capture_default_str();
  tr->add_option("--lr", topt.lr)->capture_default_str();
  tr->add_option("--momentum", topt.momentum)->capture_default_str();
  tr->add_option("--hidden", tr_hidden, "hidden widths, comma separated")->capture_default_str();
  tr->add_option("--embed", tr_embed, "time embedding size")->capture_default_str();
  tr->add_option("--seed", tr_seed, "seed for initialization and training")->required();
  tr->add_option("--csv", tr_csv, "loss curve output");
  tr->add_option("-o,--output", tr_out, "checkpoint file")->required();
  tr->callback([&] {
    const auto widths = parse_widths(tr_hidden);
    action = [&, widths] {
      const auto data = read_pack(tr_in);
      const auto [d0, d1] = ddpm::default_beta_range(tr_steps);
      const auto rule = tr_rule == "beta" ? ddpm::VarianceRule::Beta : ddpm::VarianceRule::Posterior;
      ddpm::Model model{ddpm::make_schedule(tr_steps, tr_b0.value_or(d0), tr_b1.value_or(d1), rule), data.front().spec(),
                        ddpm::MlpDenoiser({static_cast<std::uint32_t>(kSampleChannels * data.front().spec().pixel_count()),
                                           widths, tr_embed},
                                          tr_seed)};
      topt.seed = tr_seed;
      const auto report = ddpm::train(data, model.mlp, model.schedule, topt);
      ddpm::save_checkpoint(fs::path(tr_out), model);
      if (!tr_csv.empty()) ddpm::write_report_csv(tr_csv, report);
      char buf[200];
      std::snprintf(buf, sizeof buf, "parameters: %zu\nsteps: %zu\noptimizer: %s\nloss_first: %.9g\nloss_last: %.9g\n",
                    report.parameters, report.steps, report.optimizer.c_str(), report.first(), report.last());
      out << buf;
      return kExitOk;
    };
  });

  // sample
  auto* sm = app.add_subcommand("sample", "draw samples from a trained model");
  std::string sm_model, sm_out;
  std::size_t sm_count = 1;
  std::uint64_t sm_seed = 0;
  bool sm_png = false;
  sm->add_option("model", sm_model, "checkpoint")->required();
  sm->add_option("--count", sm_count)->capture_default_str()->check(CLI::PositiveNumber);
  sm->add_option("--seed", sm_seed, "chain k uses seed + k")->required();
  sm->add_flag("--png", sm_png, "also write PNG previews");
  sm->add_option("-o,--output", sm_out, "output directory")->required();
  sm->callback([&] {
    action = [&] {
      const auto model = ddpm::load_checkpoint(fs::path(sm_model));
      const auto samples = ddpm::sample(model.mlp, model.schedule, model.spec, sm_seed, sm_count);
      fs::create_directories(sm_out);
      for (std::size_t k = 0; k < samples.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "sample_%03zu", k);
        const DepthSample unit = samples[k].to(Norm::UnitRange);
        write_grid_file(fs::path(sm_out) / (std::string(name) + ".dgrd"), unit);
        if (sm_png) write_previews(fs::path(sm_out) / name, unit);
      }
      out << "samples: " << samples.size() << '\n';
      return kExitOk;
    };
  });

  // generate
  auto* gen = app.add_subcommand("generate", "sample, clean, reconstruct, drill, validate and save meshes");
  std::string gen_model, gen_out, gen_holes, gen_mode = "block";
  std::size_t gen_count = 1, gen_rays = 10000;
  std::uint64_t gen_seed = 0;
  std::uint32_t gen_res = 128;
  CleanOptions gen_clean;
  gen->add_option("model", gen_model, "checkpoint")->required();
  gen->add_option("--count", gen_count)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "chain k uses seed + k")->required();
  gen->add_option("--holes", gen_holes, "hole list JSON");
  gen->add_option("--resolution", gen_res, "voxels per axis for holes")->capture_default_str();
  gen->add_option("--mode", gen_mode, "block or smooth")->capture_default_str()->check(CLI::IsMember({"block", "smooth"}));
  gen->add_option("--snap-band", gen_clean.snap_band)->capture_default_str();
  gen->add_option("--min-component", gen_clean.min_component)->capture_default_str();
  gen->add_option("--rays", gen_rays, "monotone check rays")->capture_default_str();
  gen->add_option("-o,--output", gen_out, "output directory")->required();
  gen->callback([&] {
    action = [&] {
      const auto model = ddpm::load_checkpoint(fs::path(gen_model));
      const auto holes = gen_holes.empty() ? std::vector<Cylinder>{} : read_holes_file(gen_holes);
      const auto samples = ddpm::sample(model.mlp, model.schedule, model.spec, gen_seed, gen_count);
      fs::create_directories(gen_out);
      std::size_t failed = 0;
      for (std::size_t k = 0; k < samples.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "gen_%03zu", k);
        try {
          const DepthPair pair = clean_pair(samples[k].to(Norm::UnitRange), gen_clean);
          TriangleMesh mesh =
              reconstruct_solid(pair, gen_mode == "smooth" ? ReconstructMode::Smooth : ReconstructMode::Block);
          if (!holes.empty()) mesh = subtract_holes(mesh, holes, gen_res).mesh;
          ValidateOptions vo;
          vo.rays = gen_rays;
          const auto rep = manufacturability_report(mesh, model.spec, vo);
          save_mesh(mesh, fs::path(gen_out) / (std::string(name) + ".stl"));
          std::ofstream(fs::path(gen_out) / (std::string(name) + ".json")) << report_json(rep) << '\n';
          out << name << ": triangles " << mesh.triangle_count() << ", moldable "
              << (rep.moldable ? "PASS" : "FAIL") << ", side action "
              << (rep.side_action.required() ? "required" : "none") << '\n';
        } catch (const Error& e) {
          ++failed;
          err << name << ": " << e.what() << '\n';
        }
      }
      if (failed) {
        err << failed << " of " << samples.size() << " samples did not yield a mesh\n";
        return kExitData;
      }
      return kExitOk;
    };
  });

  // validate
  auto* val = app.add_subcommand("validate", "manufacturability report for a mesh");
  std::string val_in;
  GridFlags val_grid;
  ValidateOptions vopt;
  double val_wall = 0.0;
  bool val_json = false;
  val->add_option("mesh", val_in, "STL or OBJ")->required();
  val->add_option("--rays", vopt.rays)->capture_default_str();
  val_grid.add(val);
  val->add_option("--min-wall", val_wall, "default two cells");
  val->add_flag("--json", val_json, "emit JSON instead of text");
  val->callback([&] {
    action = [&] {
      if (val_wall > 0.0) vopt.min_wall = val_wall;
      const auto rep = manufacturability_report(load_mesh(val_in), val_grid.spec(), vopt);
      out << (val_json ? report_json(rep) + "\n" : report_text(rep));
      out << (rep.moldable && !rep.side_action.required() ? "PASS\n" : "FAIL\n");
      return kExitOk;
    };
  });

  // info
  auto* inf = app.add_subcommand("info", "describe any artifact");
  std::string inf_in;
  inf->add_option("file", inf_in)->required();
  inf->callback([&] { action = [&] { return info(out, inf_in); }; });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return kExitUsage;
  }
  try {
    return action ? action() : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: IoFailure: " << e.what() << '\n';
    return kExitData;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace moldgen::cli
