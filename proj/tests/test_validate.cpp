#include <doctest.h>

#include <algorithm>
#include <set>

#include "moldgen/error.hpp"
#include "moldgen/postprocess.hpp"
#include "moldgen/reconstruct.hpp"
#include "moldgen/scan.hpp"
#include "moldgen/validate.hpp"
#include "shapes.hpp"

using namespace moldgen;

TEST_CASE("reconstructed slab passes") {
  const GridSpec s = GridSpec::square(64);
  const auto slab = reconstruct_solid(scan_mesh(testing_shapes::box({-0.3, -0.25, -0.1}, {0.3, 0.25, 0.15}), s));
  const auto r = manufacturability_report(slab, s);
  CHECK(r.moldable);
  CHECK(r.monotone.pass);
  CHECK(r.thickness.min_thickness == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(r.thickness.max_thickness == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(r.wall_violations.empty());
  CHECK(r.min_wall == doctest::Approx(2 * s.cell_size));
  CHECK_FALSE(r.side_action.required());
  CHECK(r.projected_area == doctest::Approx(r.thickness.solid_pixels * s.cell_size * s.cell_size));
  CHECK(r.thickness.solid_pixels == 38 * 32);
  CHECK(std::abs(r.volume - signed_volume(slab)) <= 1e-9 * signed_volume(slab));
  CHECK(report_json(r).find("\"moldable\": true") != std::string::npos);
  CHECK(report_text(r).find("PASS") != std::string::npos);
}

TEST_CASE("sideways hole sets the side-action flag") {
  const GridSpec s = GridSpec::square(64);
  const auto plate = testing_shapes::box({-0.4, -0.4, -0.15}, {0.4, 0.4, 0.15});
  const auto drilled = subtract_holes(plate, {{Axis::Y, {0, 0, 0}, 0.08, true}}, 96).mesh;
  const auto r = manufacturability_report(drilled, s);
  CHECK(r.side_action.required());
  // A bore along y is crossed by the rays running along x.
  CHECK(r.side_action.x_flagged > 0);
  CHECK(r.side_action.y_flagged == 0);
  CHECK_FALSE(r.moldable);
  CHECK(std::abs(r.volume - signed_volume(drilled)) <= 1e-9 * std::abs(signed_volume(drilled)));
  CHECK(report_text(r).find("side action") != std::string::npos);
}

TEST_CASE("ribs standing on a plate need no side action") {
  const GridSpec s = GridSpec::square(64);
  const auto ribbed = merged(testing_shapes::box({-0.4, -0.4, -0.1}, {0.4, 0.4, 0.0}),
                             testing_shapes::box({-0.05, -0.4, 0.0}, {0.05, 0.4, 0.2}));
  const auto r = manufacturability_report(reconstruct_solid(scan_mesh(ribbed, s)), s);
  CHECK(r.moldable);
  CHECK_FALSE(r.side_action.required());
}

TEST_CASE("thin web is reported over its footprint") {
  const GridSpec s = GridSpec::square(64);
  const float g = DepthImage::sentinel(s);
  std::vector<float> t(s.pixel_count(), g), b(s.pixel_count(), g);
  std::set<std::pair<std::size_t, std::size_t>> web;
  for (std::size_t j = 8; j < 56; ++j)
    for (std::size_t i = 8; i < 56; ++i) {
      const bool thin = i >= 30 && i < 34;
      // 0.8 − 0.39 − 0.40 = 0.01, under two cells (0.03125).
      t[s.index(i, j)] = thin ? 0.390625f : 0.25f;
      b[s.index(i, j)] = thin ? 0.3984375f : 0.25f;
      if (thin) web.insert({i, j});
    }
  const auto mesh = reconstruct_solid(DepthPair(DepthImage(s, Side::Top, t), DepthImage(s, Side::Bottom, b)));
  const auto r = manufacturability_report(mesh, s);
  const std::set<std::pair<std::size_t, std::size_t>> got(r.wall_violations.begin(), r.wall_violations.end());
  CHECK(got == web);
  CHECK(r.moldable);

  ValidateOptions loose;
  loose.min_wall = 0.005;
  CHECK(manufacturability_report(mesh, s, loose).wall_violations.empty());
}

TEST_CASE("validation needs a closed mesh") {
  const TriangleMesh open({{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}}, {{0, 1, 2}});
  try {
    manufacturability_report(open, GridSpec::square(16));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OpenMesh);
  }
}
