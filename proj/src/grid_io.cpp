#include "moldgen/grid_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "moldgen/error.hpp"

namespace moldgen {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::size_t write_record(std::ostream& out, std::uint32_t width, std::uint32_t height, std::uint32_t channels,
                         std::uint32_t flags, std::span<const float> payload) {
  for (std::size_t k = 0; k < payload.size(); ++k)
    if (!std::isfinite(payload[k])) throw Error(ErrorCode::NonFiniteValue, "value at index " + std::to_string(k));
  out.write(kGridMagic, 4);
  put_u32(out, kGridVersion);
  put_u32(out, width);
  put_u32(out, height);
  put_u32(out, channels);
  put_u32(out, flags);
  std::vector<char> bytes(payload.size() * 4);
  for (std::size_t k = 0; k < payload.size(); ++k) {
    const auto v = std::bit_cast<std::uint32_t>(payload[k]);
    bytes[4 * k + 0] = static_cast<char>(v & 0xff);
    bytes[4 * k + 1] = static_cast<char>((v >> 8) & 0xff);
    bytes[4 * k + 2] = static_cast<char>((v >> 16) & 0xff);
    bytes[4 * k + 3] = static_cast<char>((v >> 24) & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed");
  return kGridHeaderBytes + bytes.size();
}

GridHeader parse_header(std::istream& in) {
  std::array<unsigned char, kGridHeaderBytes> h{};
  in.read(reinterpret_cast<char*>(h.data()), 4);
  if (in.gcount() < 4 || std::memcmp(h.data(), kGridMagic, 4) != 0) throw Error(ErrorCode::BadMagic, "not a DGRD record");
  in.read(reinterpret_cast<char*>(h.data() + 4), kGridHeaderBytes - 4);
  if (static_cast<std::size_t>(in.gcount()) < kGridHeaderBytes - 4)
    throw Error(ErrorCode::TruncatedPayload, "header ends early");
  GridHeader g;
  g.version = get_u32(h.data() + 4);
  g.width = get_u32(h.data() + 8);
  g.height = get_u32(h.data() + 12);
  g.channels = get_u32(h.data() + 16);
  g.flags = get_u32(h.data() + 20);
  if (g.version != kGridVersion) throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(g.version));
  if (g.channels != 1 && g.channels != kSampleChannels)
    throw Error(ErrorCode::Unsupported, "channel count " + std::to_string(g.channels));
  if (g.width == 0 || g.height == 0) throw Error(ErrorCode::InvariantViolation, "zero-sized grid");
  return g;
}

}  // namespace

GridSpec default_spec_for(std::uint32_t width, std::uint32_t height) {
  GridSpec s;
  s.width = width;
  s.height = height;
  s.cell_size = 1.0 / static_cast<double>(width);
  s.x_min = -0.5;
  s.y_min = -0.5 * height * s.cell_size;
  return s;
}

std::size_t encode_grid(const DepthImage& img, std::ostream& out, bool with_sidecar) {
  std::uint32_t flags = with_sidecar ? kFlagSidecar : 0;
  if (img.side() == Side::Bottom) flags |= kFlagBottomSide;
  return write_record(out, img.spec().width, img.spec().height, 1, flags, img.data());
}

std::size_t encode_grid(const DepthSample& sample, std::ostream& out, bool with_sidecar) {
  std::uint32_t flags = with_sidecar ? kFlagSidecar : 0;
  flags |= static_cast<std::uint32_t>(sample.norm()) << kFlagNormShift;
  return write_record(out, sample.spec().width, sample.spec().height, kSampleChannels, flags, sample.data());
}

GridHeader read_grid_header(std::istream& in) { return parse_header(in); }

GridValue decode_grid(std::istream& in, const std::optional<GridSpec>& spec_hint) {
  const GridHeader h = parse_header(in);
  GridSpec spec = spec_hint ? *spec_hint : default_spec_for(h.width, h.height);
  if (spec.width != h.width || spec.height != h.height)
    throw Error(ErrorCode::InvariantViolation, "sidecar grid size differs from record header");
  const std::size_t count = static_cast<std::size_t>(h.channels) * h.width * h.height;
  std::vector<unsigned char> bytes(count * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) < bytes.size())
    throw Error(ErrorCode::TruncatedPayload, "payload has " + std::to_string(in.gcount()) + " of " +
                                                 std::to_string(bytes.size()) + " bytes");
  std::vector<float> values(count);
  for (std::size_t k = 0; k < count; ++k) values[k] = std::bit_cast<float>(get_u32(bytes.data() + 4 * k));

  if (h.channels == 1) {
    const Side side = (h.flags & kFlagBottomSide) ? Side::Bottom : Side::Top;
    return DepthImage(spec, side, std::move(values));
  }
  const auto norm_code = (h.flags & kFlagNormMask) >> kFlagNormShift;
  if (norm_code > 2) throw Error(ErrorCode::Unsupported, "normalization code " + std::to_string(norm_code));
  DepthSample sample(spec, static_cast<Norm>(norm_code), std::move(values));
  sample.validate();
  return sample;
}

std::string spec_to_json(const GridSpec& spec) {
  nlohmann::json j;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["x_min"] = spec.x_min;
  j["y_min"] = spec.y_min;
  j["cell_size"] = spec.cell_size;
  j["z_top"] = spec.z_top;
  j["z_bottom"] = spec.z_bottom;
  return j.dump(2);
}

GridSpec spec_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    GridSpec s;
    s.width = j.at("width").get<std::uint32_t>();
    s.height = j.at("height").get<std::uint32_t>();
    s.x_min = j.at("x_min").get<double>();
    s.y_min = j.at("y_min").get<double>();
    s.cell_size = j.at("cell_size").get<double>();
    s.z_top = j.at("z_top").get<double>();
    s.z_bottom = j.at("z_bottom").get<double>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("grid sidecar: ") + e.what());
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& grid_file) {
  return std::filesystem::path(grid_file.string() + ".json");
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_sidecar(const std::filesystem::path& path, const GridSpec& spec) {
  std::ofstream out(sidecar_path(path));
  out << spec_to_json(spec) << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + sidecar_path(path).string());
}

template <class T>
void write_with_sidecar(const std::filesystem::path& path, const T& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  encode_grid(value, out, true);
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_sidecar(path, value.spec());
}

}  // namespace

void write_grid_file(const std::filesystem::path& path, const DepthImage& img) { write_with_sidecar(path, img); }
void write_grid_file(const std::filesystem::path& path, const DepthSample& sample) { write_with_sidecar(path, sample); }

GridValue read_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const GridHeader h = parse_header(in);
  std::optional<GridSpec> spec;
  if (h.flags & kFlagSidecar) {
    if (!std::filesystem::exists(sidecar_path(path)))
      throw Error(ErrorCode::IoFailure, "missing sidecar " + sidecar_path(path).string());
    spec = spec_from_json(slurp(sidecar_path(path)));
  }
  in.seekg(0);
  return decode_grid(in, spec);
}

void write_pair_file(const std::filesystem::path& path, const DepthPair& pair) {
  const std::vector<float> no_edges(pair.spec().pixel_count(), 0.0f);
  write_grid_file(path, raw_sample(pair, no_edges));
}

DepthPair read_pair_file(const std::filesystem::path& path) {
  GridValue v = read_grid_file(path);
  if (auto* s = std::get_if<DepthSample>(&v)) return sample_to_pair(*s);
  throw Error(ErrorCode::Unsupported, path.string() + " holds a single depth image, not a pair");
}

}  // namespace moldgen
