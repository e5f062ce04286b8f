#include "shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace testing_shapes {

using moldgen::Triangle;

TriangleMesh box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int k = 0; k < 8; ++k) v.push_back({k & 1 ? hi.x : lo.x, k & 2 ? hi.y : lo.y, k & 4 ? hi.z : lo.z});
  std::vector<Triangle> t = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return TriangleMesh(std::move(v), std::move(t));
}

TriangleMesh icosphere(const Vec3& c, double r, int level) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                         {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  std::vector<Triangle> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& q : v) q = q / moldgen::norm(q);
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto m = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      Vec3 q = (v[a] + v[b]) * 0.5;
      q = q / moldgen::norm(q);
      v.push_back(q);
      return mid[key] = static_cast<std::uint32_t>(v.size() - 1);
    };
    std::vector<Triangle> nt;
    for (const auto& f : t) {
      const auto a = m(f[0], f[1]), b = m(f[1], f[2]), cc = m(f[2], f[0]);
      nt.push_back({f[0], a, cc});
      nt.push_back({f[1], b, a});
      nt.push_back({f[2], cc, b});
      nt.push_back({a, b, cc});
    }
    t = std::move(nt);
  }
  for (auto& q : v) q = c + q * r;
  return TriangleMesh(std::move(v), std::move(t));
}

TriangleMesh torus_x(const Vec3& c, double R, double r, int nu, int nv) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  const double tau = 2.0 * std::numbers::pi;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double u = tau * i / nu, w = tau * j / nv;
      const double rr = R + r * std::cos(w);
      v.push_back({c.x + r * std::sin(w), c.y + rr * std::cos(u), c.z + rr * std::sin(u)});
    }
  auto id = [&](int i, int j) { return static_cast<std::uint32_t>(((i + nu) % nu) * nv + (j + nv) % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  TriangleMesh m(std::move(v), std::move(t));
  return moldgen::signed_volume(m) < 0 ? moldgen::flipped(m) : m;
}

TriangleMesh revolve(const Vec3& base, const std::vector<std::pair<double, double>>& prof, int seg) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  const double tau = 2.0 * std::numbers::pi;
  const std::uint32_t bottom = 0;
  v.push_back({base.x, base.y, base.z + prof.front().second});
  const std::size_t rings = prof.size() - 2;
  for (std::size_t k = 1; k + 1 < prof.size(); ++k)
    for (int s = 0; s < seg; ++s) {
      const double a = tau * s / seg;
      v.push_back({base.x + prof[k].first * std::cos(a), base.y + prof[k].first * std::sin(a), base.z + prof[k].second});
    }
  const auto top = static_cast<std::uint32_t>(v.size());
  v.push_back({base.x, base.y, base.z + prof.back().second});
  auto id = [&](std::size_t ring, int s) { return static_cast<std::uint32_t>(1 + ring * seg + (s % seg)); };
  for (int s = 0; s < seg; ++s) {
    t.push_back({bottom, id(0, s + 1), id(0, s)});
    for (std::size_t k = 0; k + 1 < rings; ++k) {
      t.push_back({id(k, s), id(k, s + 1), id(k + 1, s + 1)});
      t.push_back({id(k, s), id(k + 1, s + 1), id(k + 1, s)});
    }
    t.push_back({top, id(rings - 1, s), id(rings - 1, s + 1)});
  }
  return TriangleMesh(std::move(v), std::move(t));
}

TriangleMesh mushroom(const Vec3& base, double rs, double rc, double z1, double z2, int segments) {
  return revolve(base, {{0.0, 0.0}, {rs, 0.0}, {rs, z1}, {rc, z1}, {rc, z2}, {0.0, z2}}, segments);
}

DepthPair random_pair(const GridSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double gap = spec.gap();
  const float miss = moldgen::DepthImage::sentinel(spec);
  const std::size_t n = spec.pixel_count();
  std::vector<float> top(n, miss), bot(n, miss);
  // A few discs of material; everything else stays empty.
  const int blobs = 1 + static_cast<int>(u(rng) * 4);
  for (int b = 0; b < blobs; ++b) {
    const double cx = u(rng) * spec.width, cy = u(rng) * spec.height, r = 4.0 + u(rng) * spec.width * 0.3;
    for (std::size_t j = 0; j < spec.height; ++j)
      for (std::size_t i = 0; i < spec.width; ++i) {
        const double dx = i + 0.5 - cx, dy = j + 0.5 - cy;
        if (dx * dx + dy * dy > r * r) continue;
        const std::size_t k = spec.index(i, j);
        double t = u(rng) < 0.05 ? 0.0 : u(rng) * 0.6 * gap;
        double thick = (0.002 + u(rng) * 0.5) * gap;
        double bb = u(rng) < 0.05 ? 0.0 : u(rng) * (gap - t - thick);
        top[k] = static_cast<float>(t);
        bot[k] = static_cast<float>(std::max(0.0, bb));
      }
  }
  return DepthPair(moldgen::DepthImage(spec, moldgen::Side::Top, std::move(top)),
                   moldgen::DepthImage(spec, moldgen::Side::Bottom, std::move(bot)));
}

}  // namespace testing_shapes
