#include "moldgen/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "moldgen/error.hpp"

namespace moldgen {

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void parse_error(std::size_t offset, const std::string& what) {
  throw Error(ErrorCode::ParseError, what + " at byte " + std::to_string(offset));
}

std::uint32_t le_u32(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return static_cast<std::uint32_t>(u[0]) | (static_cast<std::uint32_t>(u[1]) << 8) |
         (static_cast<std::uint32_t>(u[2]) << 16) | (static_cast<std::uint32_t>(u[3]) << 24);
}

float le_f32(const char* p) { return std::bit_cast<float>(le_u32(p)); }

struct Soup {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
};

Soup parse_stl_binary(const std::string& buf) {
  if (buf.size() < 84) parse_error(buf.size(), "binary STL shorter than its 84-byte header");
  const std::uint32_t count = le_u32(buf.data() + 80);
  const std::size_t need = 84 + 50ull * count;
  if (buf.size() < need) parse_error(buf.size(), "binary STL promises " + std::to_string(count) + " triangles");
  Soup s;
  s.vertices.reserve(3ull * count);
  s.triangles.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    const char* rec = buf.data() + 84 + 50ull * t + 12;  // skip stored normal
    for (int k = 0; k < 3; ++k) {
      const char* p = rec + 12 * k;
      const Vec3 v{le_f32(p), le_f32(p + 4), le_f32(p + 8)};
      if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
        parse_error(static_cast<std::size_t>(p - buf.data()), "non-finite vertex");
      s.vertices.push_back(v);
    }
    const auto b = static_cast<std::uint32_t>(3 * t);
    s.triangles.push_back({b, b + 1, b + 2});
  }
  return s;
}

// Whitespace tokenizer that remembers where each token started.
class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  bool next(std::string_view& tok, std::size_t& offset) {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) return false;
    offset = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    tok = text_.substr(offset, pos_ - offset);
    return true;
  }

  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

double parse_double(std::string_view tok, std::size_t offset) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  if (!tok.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v)) parse_error(offset, "bad number '" + std::string(tok) + "'");
  return v;
}

Soup parse_stl_ascii(const std::string& buf) {
  Tokenizer tz(buf);
  std::string_view tok;
  std::size_t off = 0;
  if (!tz.next(tok, off) || tok != "solid") parse_error(0, "ASCII STL must start with 'solid'");
  tz.skip_line();
  Soup s;
  std::vector<Vec3> facet;
  bool in_facet = false;
  std::size_t facet_offset = 0;
  while (tz.next(tok, off)) {
    if (tok == "facet") {
      if (in_facet) parse_error(off, "nested facet");
      in_facet = true;
      facet_offset = off;
      facet.clear();
      tz.skip_line();  // optional "normal nx ny nz", ignored
    } else if (tok == "outer" || tok == "loop" || tok == "endloop") {
      continue;
    } else if (tok == "vertex") {
      if (!in_facet) parse_error(off, "vertex outside facet");
      Vec3 v;
      for (int k = 0; k < 3; ++k) {
        if (!tz.next(tok, off)) parse_error(buf.size(), "file ends inside vertex");
        v[k] = parse_double(tok, off);
      }
      facet.push_back(v);
    } else if (tok == "endfacet") {
      if (!in_facet || facet.size() < 3) parse_error(off, "facet with fewer than 3 vertices");
      const auto base = static_cast<std::uint32_t>(s.vertices.size());
      s.vertices.insert(s.vertices.end(), facet.begin(), facet.end());
      for (std::uint32_t k = 1; k + 1 < facet.size(); ++k) s.triangles.push_back({base, base + k, base + k + 1});
      in_facet = false;
    } else if (tok == "endsolid") {
      tz.skip_line();
    } else if (tok == "solid") {
      tz.skip_line();
    } else {
      parse_error(off, "unexpected token '" + std::string(tok) + "'");
    }
  }
  if (in_facet) parse_error(facet_offset, "unterminated facet");
  return s;
}

Soup parse_obj(const std::string& buf, std::vector<std::string>& warnings) {
  Soup s;
  std::map<std::string, std::size_t> skipped;
  std::size_t line_start = 0;
  while (line_start < buf.size()) {
    std::size_t line_end = buf.find('\n', line_start);
    if (line_end == std::string::npos) line_end = buf.size();
    std::string_view line(buf.data() + line_start, line_end - line_start);
    Tokenizer tz(line);
    std::string_view tok;
    std::size_t off = 0;
    if (tz.next(tok, off) && tok[0] != '#') {
      if (tok == "v") {
        Vec3 v;
        for (int k = 0; k < 3; ++k) {
          if (!tz.next(tok, off)) parse_error(line_start + line.size(), "vertex needs 3 coordinates");
          v[k] = parse_double(tok, line_start + off);
        }
        s.vertices.push_back(v);
      } else if (tok == "f") {
        std::vector<std::uint32_t> poly;
        while (tz.next(tok, off)) {
          const std::string_view idx_tok = tok.substr(0, tok.find('/'));
          long long idx = 0;
          auto [p, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
          if (ec != std::errc() || p != idx_tok.data() + idx_tok.size() || idx == 0)
            parse_error(line_start + off, "bad face index '" + std::string(tok) + "'");
          // Negative indices count back from the latest vertex.
          const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(s.vertices.size()) + idx;
          if (resolved < 0 || resolved >= static_cast<long long>(s.vertices.size()))
            parse_error(line_start + off, "face index " + std::to_string(idx) + " out of range");
          poly.push_back(static_cast<std::uint32_t>(resolved));
        }
        if (poly.size() < 3) parse_error(line_start, "face with fewer than 3 vertices");
        for (std::size_t k = 1; k + 1 < poly.size(); ++k) s.triangles.push_back({poly[0], poly[k], poly[k + 1]});
      } else {
        ++skipped[std::string(tok)];
      }
    }
    line_start = line_end + 1;
  }
  for (const auto& [rec, n] : skipped) warnings.push_back("skipped " + std::to_string(n) + " OBJ '" + rec + "' records");
  return s;
}

bool looks_like_binary_stl(const std::string& buf) {
  if (buf.size() >= 84) {
    const std::uint64_t count = le_u32(buf.data() + 80);
    if (buf.size() == 84 + 50 * count) return true;
  }
  return buf.rfind("solid", 0) != 0;
}

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

Vec3 facet_normal(const std::array<Vec3, 3>& p) {
  const Vec3 n = cross(p[1] - p[0], p[2] - p[0]);
  const double len = norm(n);
  return len > 0.0 ? n / len : Vec3{};
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
void put_f32(std::string& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::string format_double(double v, int precision) {
  std::array<char, 64> b{};
  std::snprintf(b.data(), b.size(), "%.*g", precision, v);
  return b.data();
}

}  // namespace

MeshFormat detect_format(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".obj") return MeshFormat::Obj;
  return MeshFormat::StlBinary;
}

MeshLoadResult load_mesh_report(const std::filesystem::path& path, MeshFormat format) {
  const std::string buf = read_all(path);
  MeshLoadResult result;
  Soup soup;
  if (format == MeshFormat::Auto) {
    if (lower_ext(path) == ".obj")
      format = MeshFormat::Obj;
    else
      format = looks_like_binary_stl(buf) ? MeshFormat::StlBinary : MeshFormat::StlAscii;
  }
  switch (format) {
    case MeshFormat::StlBinary: soup = parse_stl_binary(buf); break;
    case MeshFormat::StlAscii: soup = parse_stl_ascii(buf); break;
    case MeshFormat::Obj: soup = parse_obj(buf, result.warnings); break;
    case MeshFormat::Auto: break;
  }
  auto built = build_mesh(soup.vertices, soup.triangles);
  if (built.mesh.empty()) throw Error(ErrorCode::EmptyMesh, path.string() + " has no usable triangles");
  result.mesh = std::move(built.mesh);
  result.dropped_degenerate = built.dropped_degenerate;
  if (result.dropped_degenerate > 0)
    result.warnings.push_back("dropped " + std::to_string(result.dropped_degenerate) + " degenerate triangles");
  return result;
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  return load_mesh_report(path, format).mesh;
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format) {
  if (mesh.empty()) throw Error(ErrorCode::EmptyMesh, "refusing to save a mesh without triangles");
  if (format == MeshFormat::Auto) format = detect_format(path);
  std::string out;
  switch (format) {
    case MeshFormat::StlBinary: {
      out.reserve(84 + 50 * mesh.triangle_count());
      std::string header = "moldgen binary STL";
      header.resize(80, '\0');
      out += header;
      put_u32(out, static_cast<std::uint32_t>(mesh.triangle_count()));
      for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto p = mesh.corners(t);
        const Vec3 n = facet_normal(p);
        put_f32(out, n.x), put_f32(out, n.y), put_f32(out, n.z);
        for (const auto& v : p) put_f32(out, v.x), put_f32(out, v.y), put_f32(out, v.z);
        out.push_back('\0');
        out.push_back('\0');
      }
      break;
    }
    case MeshFormat::StlAscii: {
      out += "solid moldgen\n";
      for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto p = mesh.corners(t);
        const Vec3 n = facet_normal(p);
        out += "facet normal " + format_double(n.x, 9) + " " + format_double(n.y, 9) + " " + format_double(n.z, 9) +
               "\n outer loop\n";
        for (const auto& v : p)
          out += "  vertex " + format_double(v.x, 17) + " " + format_double(v.y, 17) + " " + format_double(v.z, 17) +
                 "\n";
        out += " endloop\nendfacet\n";
      }
      out += "endsolid moldgen\n";
      break;
    }
    case MeshFormat::Obj: {
      for (const auto& v : mesh.vertices())
        out += "v " + format_double(v.x, 17) + " " + format_double(v.y, 17) + " " + format_double(v.z, 17) + "\n";
      for (const auto& t : mesh.triangles())
        out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
      break;
    }
    case MeshFormat::Auto: break;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

}  // namespace moldgen
