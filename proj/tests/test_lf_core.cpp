#include <doctest.h>

#include <cmath>

#include "lfi/color.hpp"
#include "lfi/light_field.hpp"
#include "lfi/synth.hpp"

using namespace lfi;

namespace {

LightField ramp_field(const Dims& d) {
  LightField lf(d);
  for (int v = 0; v < d.n_v; ++v)
    for (int u = 0; u < d.n_u; ++u)
      for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x)
          for (int c = 0; c < 3; ++c) lf.at(u, v, x, y, c) = 0.001 * (x + 10 * y + 100 * u + 1000 * v) + 0.1 * c;
  return lf;
}

}  // namespace

TEST_CASE("view extraction returns the stored raster") {
  SceneSpec spec;
  spec.dims = Dims{3, 3, 8, 8};
  const Scene scene = generate(spec, 3);
  const Image v11 = scene.radiance.view(1, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      for (int c = 0; c < 3; ++c) CHECK(v11.at(x, y, c) == scene.radiance.at(1, 1, x, y, c));
}

TEST_CASE("view index bounds") {
  const LightField lf(Dims{3, 2, 4, 4});
  CHECK_NOTHROW(lf.view(2, 1));
  CHECK_THROWS_AS(lf.view(3, 0), Error);
  CHECK_THROWS_AS(lf.view(0, -1), Error);
  try {
    lf.view(0, 2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Index);
  }
}

TEST_CASE("assemble round trips views") {
  const Dims d{2, 3, 5, 4};
  const LightField lf = ramp_field(d);
  std::vector<Image> views;
  for (int v = 0; v < d.n_v; ++v)
    for (int u = 0; u < d.n_u; ++u) views.push_back(lf.view(u, v));
  const LightField back = assemble(d, views);
  CHECK(std::equal(back.samples().begin(), back.samples().end(), lf.samples().begin()));

  views.pop_back();
  CHECK_THROWS_AS(assemble(d, views), Error);
}

TEST_CASE("set_view rejects a wrong shape") {
  LightField lf(Dims{2, 2, 4, 4});
  CHECK_THROWS_AS(lf.set_view(0, 0, Image(5, 4, 3)), Error);
  CHECK_THROWS_AS(lf.set_view(0, 0, Image(4, 4, 1)), Error);
}

TEST_CASE("horizontal EPI collects one scanline from each view of a row") {
  const Dims d{4, 2, 6, 5};
  const LightField lf = ramp_field(d);
  const Image epi = epi_horizontal(lf, 3, 1);
  REQUIRE(epi.width() == d.width);
  REQUIRE(epi.height() == d.n_u);
  for (int u = 0; u < d.n_u; ++u)
    for (int x = 0; x < d.width; ++x) CHECK(epi.at(x, u, 2) == lf.at(u, 1, x, 3, 2));

  const Image vert = epi_vertical(lf, 2, 3);
  REQUIRE(vert.width() == d.height);
  REQUIRE(vert.height() == d.n_v);
  for (int v = 0; v < d.n_v; ++v)
    for (int y = 0; y < d.height; ++y) CHECK(vert.at(y, v, 0) == lf.at(3, v, 2, y, 0));
}

TEST_CASE("one-pixel disparity gives EPI lines of slope one") {
  SceneSpec spec;
  spec.dims = Dims{5, 1, 32, 8};
  spec.disparity = 1.0;
  spec.shading_min = spec.shading_max = 1.0;
  const Scene scene = generate(spec, 2);
  const Image epi = epi_horizontal(scene.radiance, 4, 0);
  // Row u is row u_c shifted by (u - u_c) pixels.
  for (int u = 0; u < 5; ++u)
    for (int x = 4; x < 28; ++x)
      CHECK(epi.at(x + (u - 2), u, 0) == doctest::Approx(epi.at(x, 2, 0)).epsilon(1e-12));
}

TEST_CASE("per-ray norm and division reconstruct the input") {
  SceneSpec spec;
  spec.dims = Dims{2, 2, 16, 16};
  const LightField lf = generate(spec, 5).radiance;
  const ScalarLightField s0 = per_ray_l2_norm(lf);
  const LightField r0 = divide_by_scalar_field(lf, s0, 1e-3);
  const LightField back = multiply_by_scalar_field(r0, s0);
  for (std::size_t k = 0; k < lf.samples().size(); ++k) {
    if (s0.samples()[k / 3] >= 1e-3) CHECK(std::abs(back.samples()[k] - lf.samples()[k]) < 1e-9);
  }
  CHECK_THROWS_AS(divide_by_scalar_field(lf, ScalarLightField(Dims{2, 2, 8, 16}), 1e-3), Error);
  CHECK_THROWS_AS(divide_by_scalar_field(lf, s0, 0.0), Error);
}

TEST_CASE("division by a near-zero norm is clamped") {
  LightField lf(Dims{1, 1, 1, 1}, 0.0);
  const ScalarLightField s(Dims{1, 1, 1, 1}, 0.0);
  const LightField r = divide_by_scalar_field(lf, s, 1e-3);
  CHECK(r.at(0, 0, 0, 0, 0) == 0.0);
  CHECK(all_finite(r.samples()));
}

TEST_CASE("channel reductions") {
  LightField lf(Dims{1, 1, 1, 1});
  lf.at(0, 0, 0, 0, 0) = 0.3;
  lf.at(0, 0, 0, 0, 1) = 0.4;
  lf.at(0, 0, 0, 0, 2) = 0.0;
  CHECK(reduce_channels(lf, ChannelReduction::L2Norm).at(0, 0, 0, 0) == doctest::Approx(0.5));
  CHECK(reduce_channels(lf, ChannelReduction::Mean).at(0, 0, 0, 0) == doctest::Approx(0.7 / 3));
  LightField white(Dims{1, 1, 1, 1}, 1.0);
  CHECK(reduce_channels(white, ChannelReduction::Luminance).at(0, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("log views clamp at eps") {
  Image img(2, 1, 1);
  img.at(0, 0) = 0.0;
  img.at(1, 0) = 0.5;
  const LogView lv = to_log(img, 1e-4);
  CHECK(lv.values.at(0, 0) == doctest::Approx(std::log(1e-4)));
  CHECK(lv.values.at(1, 0) == doctest::Approx(std::log(0.5)));
  CHECK(from_log(lv).at(1, 0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(to_log(img, 0.0), Error);
}

TEST_CASE("radiance validation") {
  LightField lf(Dims{1, 1, 2, 2}, 0.5);
  CHECK_NOTHROW(validate_radiance(lf));
  lf.at(0, 0, 1, 1, 2) = std::nan("");
  CHECK_THROWS_AS(validate_radiance(lf), Error);
  lf.at(0, 0, 1, 1, 2) = -0.1;
  CHECK_THROWS_AS(validate_radiance(lf), Error);
}

TEST_CASE("CIELab of reference colors") {
  const Lab white = linear_rgb_to_lab(1, 1, 1);
  CHECK(white.l == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(std::abs(white.a) < 0.01);
  CHECK(std::abs(white.b) < 0.01);
  const Lab black = linear_rgb_to_lab(0, 0, 0);
  CHECK(black.l == doctest::Approx(0.0));
  // sRGB red: L* 53.24, a* 80.09, b* 67.20
  const Lab red = linear_rgb_to_lab(1, 0, 0);
  CHECK(red.l == doctest::Approx(53.24).epsilon(1e-3));
  CHECK(red.a == doctest::Approx(80.09).epsilon(1e-3));
  CHECK(red.b == doctest::Approx(67.20).epsilon(1e-3));
}

TEST_CASE("sRGB transfer round trip") {
  for (double x = 0.0; x <= 1.0; x += 0.01) CHECK(srgb_to_linear(linear_to_srgb(x)) == doctest::Approx(x));
  CHECK(srgb_to_linear(0.5) == doctest::Approx(0.214041).epsilon(1e-5));
}
