#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "f2v/core/errors.hpp"
#include "f2v/core/flow.hpp"
#include "f2v/core/palette.hpp"
#include "f2v/core/rng.hpp"
#include "helpers.hpp"

using namespace f2v;

namespace {

// plain hypot/atan2 per pixel, independent of flow_to_polar
std::pair<double, double> polar_oracle(double u, double v) { return {std::sqrt(u * u + v * v), std::atan2(v, u)}; }

}  // namespace

TEST_CASE("flow_to_polar examples") {
  auto p = flow_to_polar(testutil::uniform_flow(3, 2, 3.0f, 4.0f));
  for (std::size_t i = 0; i < p.magnitude.size(); ++i) {
    CHECK(p.magnitude[i] == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(p.angle[i] == doctest::Approx(0.9273).epsilon(1e-4));
    CHECK(p.angle[i] == doctest::Approx(polar_oracle(3, 4).second).epsilon(1e-7));
  }
  p = flow_to_polar(testutil::uniform_flow(2, 2, 1.0f, 0.0f));
  CHECK(p.magnitude[0] == 1.0f);
  CHECK(p.angle[0] == 0.0f);
  p = flow_to_polar(testutil::uniform_flow(2, 2, 0.0f, 0.0f));
  CHECK(p.magnitude[3] == 0.0f);
  CHECK(p.angle[3] == 0.0f);
}

TEST_CASE("flow_to_polar rejects non-finite flow and counts pixels") {
  FlowField f(2, 2);
  f.u[1] = std::numeric_limits<float>::quiet_NaN();
  f.v[2] = std::numeric_limits<float>::infinity();
  try {
    flow_to_polar(f);
    FAIL("expected InvalidInputError");
  } catch (const InvalidInputError& e) {
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }
  CHECK_THROWS_AS(compute_direction_map(f), InvalidInputError);
}

TEST_CASE("angle lies in (-pi, pi]") {
  auto p = flow_to_polar(testutil::uniform_flow(1, 1, -1.0f, -0.0f));
  CHECK(p.angle[0] == doctest::Approx(std::numbers::pi));
  CHECK(p.angle[0] > 0.0f);
}

TEST_CASE("compute_direction_map examples") {
  auto d = compute_direction_map(testutil::uniform_flow(4, 4, 1.0f, 0.0f));
  CHECK(d.c0[5] == 1.0f);
  CHECK(d.c1[5] == 0.0f);
  d = compute_direction_map(testutil::uniform_flow(4, 4, 1.0f, 1.0f));
  const double a = polar_oracle(1, 1).second;
  CHECK(d.c0[0] == doctest::Approx(std::abs(std::cos(a))).epsilon(1e-6));
  CHECK(d.c1[0] == doctest::Approx(std::abs(std::sin(a))).epsilon(1e-6));
  CHECK(d.c0[0] == doctest::Approx(0.70711).epsilon(1e-5));
  d = compute_direction_map(testutil::uniform_flow(4, 4, 0.0f, 0.0f), 1e-3f);
  CHECK(d.c0[0] == 0.0f);
  CHECK(d.c1[0] == 0.0f);
  CHECK_THROWS_AS(compute_direction_map(testutil::uniform_flow(1, 1, 1, 1), 0.0f), ParameterError);
  CHECK_THROWS_AS(compute_direction_map(testutil::uniform_flow(1, 1, 1, 1), -1.0f), ParameterError);
}

TEST_CASE("direction map masks below eps and discards sign") {
  FlowField f(1, 4);
  f.u = {5e-4f, -2.0f, 2.0f, 0.0f};
  f.v = {0.0f, 0.0f, 0.0f, -3.0f};
  auto d = compute_direction_map(f, 1e-3f);
  CHECK(d.c0[0] == 0.0f);
  CHECK(d.c0[1] == d.c0[2]);
  CHECK(d.c1[3] == 1.0f);
}

TEST_CASE("property: direction maps are unit or zero vectors in [0,1]^2") {
  std::mt19937 gen(11);
  std::normal_distribution<float> n(0.0f, 2.0f);
  std::bernoulli_distribution stat(0.2);
  for (int trial = 0; trial < 50; ++trial) {
    FlowField f(8, 8);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (stat(gen)) continue;
      f.u[i] = n(gen);
      f.v[i] = n(gen);
    }
    const auto d = compute_direction_map(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
      REQUIRE(d.c0[i] >= 0.0f);
      REQUIRE(d.c0[i] <= 1.0f);
      REQUIRE(d.c1[i] >= 0.0f);
      REQUIRE(d.c1[i] <= 1.0f);
      const double norm = static_cast<double>(d.c0[i]) * d.c0[i] + static_cast<double>(d.c1[i]) * d.c1[i];
      const bool moving = std::hypot(f.u[i], f.v[i]) >= kDefaultMotionEpsilon;
      REQUIRE(std::abs(norm - (moving ? 1.0 : 0.0)) <= 1e-6);
    }
  }
}

TEST_CASE("property: polar -> cartesian -> polar is identity for magnitude > 0") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> mag(0.01, 20.0);
  std::uniform_real_distribution<double> ang(-std::numbers::pi + 1e-6, std::numbers::pi);
  FlowField f(1, 500);
  std::vector<double> m(500), a(500);
  for (int i = 0; i < 500; ++i) {
    m[i] = mag(gen);
    a[i] = ang(gen);
    f.u[i] = static_cast<float>(m[i] * std::cos(a[i]));
    f.v[i] = static_cast<float>(m[i] * std::sin(a[i]));
  }
  const auto p = flow_to_polar(f);
  for (int i = 0; i < 500; ++i) {
    // float32 storage of u, v bounds the achievable agreement
    CHECK(std::abs(p.magnitude[i] - m[i]) <= 1e-6 * std::max(1.0, m[i]) * 4);
    double da = std::remainder(p.angle[i] - a[i], 2 * std::numbers::pi);
    CHECK(std::abs(da) <= 1e-6);
  }
}

TEST_CASE("colorize examples") {
  const auto pal = ClassPalette::default_palette();
  ClassMap zeros(4, 4, 0);
  auto f = colorize(zeros, pal);
  for (float v : f.image.data) CHECK(v == 0.0f);

  ClassMap one(3, 3, 0);
  one.at(1, 1) = pal.by_name("person").class_id;
  f = colorize(one, pal, 7);
  CHECK(f.frame_index == 7);
  CHECK(f.image.at(0, 1, 1) == 0.0f);
  CHECK(f.image.at(1, 1, 1) == 1.0f);  // human is green
  CHECK(f.image.at(2, 1, 1) == 0.0f);
  CHECK(f.image.at(1, 0, 0) == 0.0f);
}

TEST_CASE("colorize then nearest decode round trips random class maps") {
  const auto pal = ClassPalette::default_palette();
  std::mt19937 gen(3);
  std::uniform_int_distribution<std::size_t> pick(0, pal.size() - 1);
  ClassMap m(16, 12);
  for (int& id : m.ids) id = pal.entries()[pick(gen)].class_id;
  const auto frame = colorize(m, pal);
  // nearest-color oracle written out directly
  ClassMap decoded(16, 12);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 12; ++x) {
      double best = 1e9;
      for (const auto& e : pal.entries()) {
        double d = 0;
        for (int c = 0; c < 3; ++c) d += std::pow(frame.image.at(c, y, x) - e.color[c], 2);
        if (d < best) {
          best = d;
          decoded.at(y, x) = e.class_id;
        }
      }
    }
  }
  CHECK(decoded == m);
  CHECK(decode_classes(frame.image, pal) == m);
}

TEST_CASE("colorize reports unknown ids") {
  ClassMap m(2, 2, 0);
  m.at(0, 1) = 42;
  try {
    colorize(m, ClassPalette::default_palette());
    FAIL("expected PaletteMissError");
  } catch (const PaletteMissError& e) {
    CHECK(std::string(e.what()).find("42") != std::string::npos);
  }
}

TEST_CASE("property: colorize is injective for a distinct-color palette") {
  const auto pal = ClassPalette::default_palette();
  std::mt19937 gen(8);
  std::uniform_int_distribution<int> id(0, 7);
  for (int trial = 0; trial < 100; ++trial) {
    ClassMap a(4, 4), b(4, 4);
    for (auto& v : a.ids) v = id(gen);
    b = a;
    b.ids[static_cast<std::size_t>(trial % 16)] = (a.ids[static_cast<std::size_t>(trial % 16)] + 1 + trial % 7) % 8;
    CHECK(!(colorize(a, pal).image == colorize(b, pal).image));
  }
}

TEST_CASE("palette invariants are enforced") {
  CHECK(ClassPalette::default_palette().size() == 8);
  CHECK(ClassPalette::default_palette().entry(0).color == Color{0, 0, 0});
  CHECK_THROWS(ClassPalette({{0, "bg", {0, 0, 0}}}));
  CHECK_THROWS(ClassPalette({{0, "bg", {0.1f, 0, 0}}, {1, "a", {1, 0, 0}}}));
  CHECK_THROWS(ClassPalette({{0, "bg", {0, 0, 0}}, {1, "a", {1, 0, 0}}, {2, "b", {1, 0, 0}}}));
  CHECK_THROWS(ClassPalette({{0, "bg", {0, 0, 0}}, {1, "a", {1, 0, 0}}, {1, "b", {0, 1, 0}}}));
  CHECK_THROWS(ClassPalette({{1, "a", {1, 0, 0}}, {2, "b", {0, 1, 0}}}));
}

TEST_CASE("rng is reproducible and in range") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(1);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto v = r.uniform_int(2, 6);
    REQUIRE(v >= 2);
    REQUIRE(v <= 6);
    ++hits[static_cast<std::size_t>(v - 2)];
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  for (int h : hits) CHECK(h > 800);
  double sum = 0, sq = 0;
  for (int i = 0; i < 20000; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / 20000) < 0.05);
  CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}
