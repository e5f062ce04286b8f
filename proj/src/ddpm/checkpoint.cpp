#include "moldgen/ddpm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "moldgen/error.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace moldgen::ddpm {

namespace {

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error(ErrorCode::TruncatedPayload, "checkpoint ends early");
  return v;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Model& m) {
  out.write(kCheckpointMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.schedule.steps()));
  put<double>(out, m.schedule.beta_start());
  put<double>(out, m.schedule.beta_end());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.schedule.rule()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kSampleChannels));
  put<std::uint32_t>(out, m.spec.height);
  put<std::uint32_t>(out, m.spec.width);
  for (double v : {m.spec.x_min, m.spec.y_min, m.spec.cell_size, m.spec.z_top, m.spec.z_bottom}) put<double>(out, v);
  put<std::uint32_t>(out, m.mlp.config().embed_dim);
  const auto& dims = m.mlp.layer_dims();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put<std::uint32_t>(out, d);
  put<std::uint64_t>(out, m.mlp.parameter_count());
  out.write(reinterpret_cast<const char*>(m.mlp.parameters().data()),
            static_cast<std::streamsize>(m.mlp.parameter_count() * sizeof(float)));
  if (!out) throw Error(ErrorCode::IoFailure, "checkpoint write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  save_checkpoint(f, model);
}

Model load_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw Error(ErrorCode::TruncatedPayload, "checkpoint shorter than its magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw Error(ErrorCode::BadMagic, "not a DDPM checkpoint");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::UnsupportedVersion, "checkpoint version " + std::to_string(version));
  const auto steps = get<std::uint32_t>(in);
  const auto b0 = get<double>(in), b1 = get<double>(in);
  const auto rule = get<std::uint32_t>(in);
  if (rule > 1) throw Error(ErrorCode::ParseError, "unknown variance rule " + std::to_string(rule));
  const auto channels = get<std::uint32_t>(in);
  if (channels != kSampleChannels) throw Error(ErrorCode::Unsupported, "checkpoint samples must have 3 channels");
  GridSpec spec;
  spec.height = get<std::uint32_t>(in);
  spec.width = get<std::uint32_t>(in);
  spec.x_min = get<double>(in);
  spec.y_min = get<double>(in);
  spec.cell_size = get<double>(in);
  spec.z_top = get<double>(in);
  spec.z_bottom = get<double>(in);
  spec.validate();

  MlpConfig cfg;
  cfg.embed_dim = get<std::uint32_t>(in);
  const auto layers = get<std::uint32_t>(in);
  if (layers < 2 || layers > 64) throw Error(ErrorCode::ShapeMismatch, "implausible layer count");
  std::vector<std::uint32_t> dims(layers);
  for (auto& d : dims) d = get<std::uint32_t>(in);
  cfg.input_dim = static_cast<std::uint32_t>(channels * spec.pixel_count());
  if (dims.front() != cfg.input_dim + cfg.embed_dim || dims.back() != cfg.input_dim)
    throw Error(ErrorCode::ShapeMismatch, "layer dims do not match the sample shape");
  cfg.hidden.assign(dims.begin() + 1, dims.end() - 1);

  Model m{make_schedule(static_cast<int>(steps), b0, b1, static_cast<VarianceRule>(rule)), spec,
          MlpDenoiser(cfg, 0)};
  const auto count = get<std::uint64_t>(in);
  if (count != m.mlp.parameter_count())
    throw Error(ErrorCode::ShapeMismatch, "parameter count " + std::to_string(count) + " does not match layer dims");
  if (!in.read(reinterpret_cast<char*>(m.mlp.parameters().data()), static_cast<std::streamsize>(count * sizeof(float))))
    throw Error(ErrorCode::TruncatedPayload, "parameter blob ends early");
  return m;
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return load_checkpoint(f);
}

}  // namespace moldgen::ddpm
