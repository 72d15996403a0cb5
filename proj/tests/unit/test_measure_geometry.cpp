#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ppconv/density.hpp"

using namespace ppconv;

namespace {

constexpr double kPi = std::numbers::pi;

DensityModel wavy2() {
  auto f = [](PointView y) { return std::exp(0.5 * y[0]) * (1.0 + 0.3 * std::sin(3.0 * y[1])); };
  return DensityModel::custom(2, f, Box::cube(2, -1.0, 1.0), 0.7 * std::exp(-0.5), 1.3 * std::exp(0.5), 2.0, "wavy");
}

// Same as the constant model but forced through quadrature.
DensityModel custom_constant(int d, double c) {
  return DensityModel::custom(d, [c](PointView) { return c; }, Box::cube(d, -2.0, 2.0), c, c, 0.0, "c");
}

}  // namespace

TEST_CASE("ball_measure examples") {
  const auto one = DensityModel::constant(2, 1.0, Box::cube(2, -3.0, 3.0));
  const std::array<double, 2> o{0.0, 0.0};
  CHECK(ball_measure(one, o, 1.0) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(ball_measure(one, o, 0.0) == 0.0);
  CHECK(ball_measure(wavy2(), o, 0.0) == 0.0);

  const auto lin = DensityModel::linear(2, 1.0, 1.0, Box::cube(2, -0.4, 0.4));
  const double m = ball_measure(lin, o, 0.1);
  CHECK(std::abs(m - kPi * 0.01) <= 1e-8 * kPi * 0.01);
  const double mid = oracle::polar_midpoint([](double a, double) { return 1.0 + a; }, {0.0, 0.0}, 0.1, 400, 64);
  CHECK(std::abs(m - mid) <= 1e-8 * mid);
}

TEST_CASE("ball_measure quadrature agrees with midpoint oracle for a non-polynomial density") {
  const auto f = wavy2();
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> pos(-0.5, 0.5);
  std::uniform_real_distribution<double> rad(0.01, 0.45);
  for (int i = 0; i < 6; ++i) {
    const std::array<double, 2> x{pos(gen), pos(gen)};
    const double r = rad(gen);
    const double q = ball_measure(f, x, r);
    const double mid = oracle::polar_midpoint(
        [](double a, double b) { return std::exp(0.5 * a) * (1.0 + 0.3 * std::sin(3.0 * b)); }, {x[0], x[1]}, r,
        6000, 96);
    CHECK(std::abs(q - mid) <= 1e-8 * mid);
  }
}

TEST_CASE("closed forms agree with quadrature to 1e-8 for d = 1, 2, 3") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> pos(-0.8, 0.8);
  std::uniform_real_distribution<double> rad(0.0, 1.0);
  for (int d = 1; d <= 3; ++d) {
    const auto closed = DensityModel::constant(d, 1.7, Box::cube(d, -2.0, 2.0));
    const auto quad = custom_constant(d, 1.7);
    for (int i = 0; i < 5; ++i) {
      std::vector<double> x(d);
      for (auto& v : x) v = pos(gen);
      const double r = rad(gen);
      const double exact = 1.7 * unit_ball_volume(d) * std::pow(r, d);
      CHECK(ball_measure(closed, x, r) == doctest::Approx(exact).epsilon(1e-14));
      CHECK(std::abs(ball_measure(quad, x, r) - exact) <= 1e-8 * exact);
    }
  }
}

TEST_CASE("clipped linear density in d = 1 integrates exactly") {
  const auto lin = DensityModel::linear(1, 0.1, 1.0, Box::cube(1, -1.0, 1.0));
  const std::array<double, 1> x{0.0};
  // max(0, 0.1 + y) on [-0.5, 0.5]: zero below -0.1, then a ramp.
  const double exact = 0.5 * 0.6 * 0.6;
  CHECK(ball_measure(lin, x, 0.5) == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("ball_measure errors") {
  const auto one = DensityModel::constant(2, 1.0, Box::cube(2, 0.0, 1.0));
  const std::array<double, 2> x{0.5, 0.5};
  CHECK_THROWS_AS(ball_measure(one, x, 0.6), Error);
  try {
    ball_measure(one, x, 0.6);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ball_escapes_support);
  }
  auto bad = DensityModel::custom(2, [](PointView) { return std::nan(""); }, Box::cube(2, 0.0, 1.0), 0.0, 1.0);
  try {
    ball_measure(bad, x, 0.1);
    FAIL("expected non_finite_density");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_finite_density);
  }
}

TEST_CASE("invert_ball_measure examples and round trips") {
  const auto one = DensityModel::constant(2, 1.0, Box::cube(2, -3.0, 3.0));
  const std::array<double, 2> o{0.0, 0.0};
  CHECK(invert_ball_measure(one, o, kPi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(invert_ball_measure(one, o, 0.0) == 0.0);
  const auto two = DensityModel::constant(1, 2.0, Box::cube(1, -1.0, 1.0));
  const std::array<double, 1> z{0.0};
  CHECK(invert_ball_measure(two, z, 1.0) == doctest::Approx(0.25).epsilon(1e-12));

  const auto f = wavy2();
  for (double r : {0.05, 0.2, 0.4}) {
    const double m = ball_measure(f, o, r);
    CHECK(std::abs(invert_ball_measure(f, o, m) - r) <= 1e-9);
  }
  try {
    invert_ball_measure(f, o, 100.0);
    FAIL("expected mass_exceeds_reach");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::mass_exceeds_reach);
  }
}

TEST_CASE("threshold radii: closed forms, bound, and constant-density equality") {
  const auto one2 = DensityModel::constant(2, 1.0, Box::cube(2, -3.0, 3.0));
  const std::array<double, 2> o{0.0, 0.0};
  const auto r2 = threshold_radii(one2, o, 0.0, std::numbers::e);
  const double expect = std::sqrt(1.0 / (4.0 * kPi * std::numbers::e));
  CHECK(r2.v == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r2.q == doctest::Approx(expect).epsilon(1e-12));

  const auto one1 = DensityModel::constant(1, 1.0, Box::cube(1, -3.0, 3.0));
  const std::array<double, 1> z{0.0};
  for (double t : {10.0, 1000.0}) {
    for (double u : {-1.0, 0.0, 2.0}) {
      const auto r1 = threshold_radii(one1, z, u, t);
      const double e = (u + std::log(t)) / (4.0 * t);
      CHECK(r1.v == doctest::Approx(e).epsilon(1e-11));
      CHECK(r1.q == doctest::Approx(e).epsilon(1e-11));
      CHECK(r1.v == r1.q);
    }
  }

  const auto f = wavy2();
  for (double t : {200.0, 1e4}) {
    for (double u : {0.0, 1.0, 3.0}) {
      const auto r = threshold_radii(f, o, u, t);
      const double bound = threshold_radius_bound(f, u, t);
      CHECK(std::max(r.v, r.q) <= bound * (1.0 + 1e-12));
      CHECK(t * ball_measure(f, o, 2.0 * r.v) == doctest::Approx(u + std::log(t)).epsilon(1e-8));
      CHECK(4.0 * t * ball_measure(f, o, r.q) == doctest::Approx(u + std::log(t)).epsilon(1e-8));
    }
  }
  try {
    threshold_radii(f, o, 20.0, 2.0);
    FAIL("expected below_t0");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::below_t0);
  }
}

TEST_CASE("density_bounds") {
  const Window w(Box::cube(2, 0.0, 1.0));
  const auto three = DensityModel::constant(2, 3.0, Box::cube(2, -1.0, 2.0));
  const auto b3 = density_bounds(three, w);
  CHECK(b3.beta == 3.0);
  CHECK(b3.sup == 3.0);

  const auto lin = DensityModel::linear(2, 1.0, 1.0, Box::cube(2, -0.5, 1.5));
  const auto bl = density_bounds(lin, w);
  CHECK(bl.beta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bl.sup == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(bl.beta_lower <= bl.beta);
  CHECK(bl.sup_upper >= bl.sup);
  CHECK(bl.beta_lower >= lin.f_min());
  CHECK(bl.sup_upper <= lin.f_max());

  const auto vanishing = DensityModel::linear(2, 0.0, 1.0, Box::cube(2, -0.5, 1.5));
  try {
    density_bounds(vanishing, w);
    FAIL("expected nonpositive_minimum");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::nonpositive_minimum);
  }
}

TEST_CASE("region_mass and windows") {
  const auto lin = DensityModel::linear(2, 0.5, 1.0, Box::cube(2, -0.4, 1.4));
  CHECK(region_mass(lin, Window(Box::cube(2, 0.0, 1.0))) == doctest::Approx(1.0).epsilon(1e-12));
  const auto one = DensityModel::constant(2, 1.0, Box::cube(2, -1.0, 2.0));
  const ConvexPolygon tri{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
  CHECK(region_mass(one, Window(tri)) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(region_mass(wavy2(), Window(Box::cube(2, -0.5, 0.5))) ==
        doctest::Approx(2.0 * (std::exp(0.25) - std::exp(-0.25))).epsilon(1e-9));
  const auto step = DensityModel::step(Box::cube(1, 0.0, 1.0), {2}, {1.0, 2.0});
  CHECK(region_mass(step, Window(Box::cube(1, 0.25, 0.75))) == doctest::Approx(0.75).epsilon(1e-14));
  const ConvexPolygon clockwise{{{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}}};
  CHECK_THROWS_AS(Window{clockwise}, Error);
}

TEST_CASE("scaled densities normalize the window mass") {
  const auto lin = DensityModel::linear(2, 1.0, 2.0, Box::cube(2, -0.2, 1.2));
  const Window w(Box::cube(2, 0.0, 1.0));
  const double m = region_mass(lin, w);
  const auto unit = lin.scaled(1.0 / m);
  CHECK(region_mass(unit, w) == doctest::Approx(1.0).epsilon(1e-12));
  const std::array<double, 2> x{0.5, 0.5};
  CHECK(ball_measure(unit, x, 0.1) == doctest::Approx(ball_measure(lin, x, 0.1) / m).epsilon(1e-12));
}

TEST_CASE("ball_measure is monotone in r") {
  const auto f = wavy2();
  const std::array<double, 2> x{0.1, -0.2};
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double m = ball_measure(f, x, 0.03 * i);
    CHECK(m > prev);
    prev = m;
  }
}
