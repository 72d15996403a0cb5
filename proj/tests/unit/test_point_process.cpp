#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "ppconv/parallel.hpp"
#include "ppconv/point_process.hpp"
#include "ppconv/rng.hpp"

using namespace ppconv;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::bijection(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox streams are reproducible and distinct") {
  Philox4x32 a(42, 3);
  Philox4x32 b(42, 3);
  Philox4x32 c(42, 4);
  int same = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    same += x == c() ? 1 : 0;
  }
  CHECK(same == 0);
  Philox4x32 u(1, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    CHECK_FALSE((v < 0.0 || v >= 1.0));
    sum += v;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 0.005);
}

TEST_CASE("parallel_map keeps index order and propagates errors") {
  const auto out = parallel_map(50, 4, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < 50; ++i) CHECK(out[i] == i * i);
  CHECK_THROWS(parallel_map(10, 3, [](std::size_t i) -> int {
    if (i == 7) throw Error(Errc::domain, "boom");
    return 0;
  }));
}

TEST_CASE("Poisson counts: mean, void probability, chi-square against Poisson(t mu)") {
  const auto f = DensityModel::constant(2, 1.0, Box::cube(2, 0.0, 1.0));
  const Box box = Box::cube(2, 0.0, 1.0);
  const std::size_t reps = 20000;
  std::vector<std::size_t> counts(reps);
  for (std::size_t r = 0; r < reps; ++r) counts[r] = sample_poisson(f, 1.0, box, 5, stream_id(r)).size();
  double mean = 0.0;
  std::size_t empty = 0;
  std::vector<double> hist(8, 0.0);
  for (auto c : counts) {
    mean += static_cast<double>(c);
    empty += c == 0 ? 1 : 0;
    hist[std::min<std::size_t>(c, 7)] += 1.0;
  }
  mean /= static_cast<double>(reps);
  CHECK(std::abs(mean - 1.0) < 4.0 * std::sqrt(1.0 / reps));
  const double p0 = static_cast<double>(empty) / static_cast<double>(reps);
  CHECK(std::abs(p0 - std::exp(-1.0)) < 4.0 * std::sqrt(std::exp(-1.0) * (1 - std::exp(-1.0)) / reps));

  // bins 0..4 and >= 5
  double chi2 = 0.0;
  double tail = 1.0;
  double observed_tail = static_cast<double>(reps);
  double pk = std::exp(-1.0);
  for (int k = 0; k < 5; ++k) {
    const double e = pk * static_cast<double>(reps);
    chi2 += (hist[k] - e) * (hist[k] - e) / e;
    tail -= pk;
    observed_tail -= hist[k];
    pk /= (k + 1);
  }
  const double e = tail * static_cast<double>(reps);
  chi2 += (observed_tail - e) * (observed_tail - e) / e;
  boost::math::chi_squared dist(5);
  CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 1e-4);
}

TEST_CASE("Poisson sampling follows an inhomogeneous density") {
  const auto f = DensityModel::linear(1, 0.0, 2.0, Box::cube(1, 0.0, 1.0));
  const auto pts = sample_poisson(f, 20000.0, Box::cube(1, 0.0, 1.0), 9);
  std::size_t left = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) left += pts[i][0] < 0.5 ? 1 : 0;
  // mu([0, 1/2]) = 1/4 of mu([0, 1])
  const double frac = static_cast<double>(left) / static_cast<double>(pts.size());
  CHECK(std::abs(frac - 0.25) < 0.015);
  CHECK_FALSE(pts.has_duplicates());
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts.meta().box.contains(pts[i]));
}

TEST_CASE("Poisson sampling errors and determinism") {
  const auto f = DensityModel::constant(2, 1.0, Box::cube(2, 0.0, 1.0));
  CHECK_THROWS_AS(sample_poisson(f, 1.0, Box::cube(2, -0.5, 1.0), 1), Error);
  CHECK_THROWS_AS(sample_poisson(f, -1.0, Box::cube(2, 0.0, 1.0), 1), Error);
  const auto a = sample_poisson(f, 500.0, Box::cube(2, 0.0, 1.0), 77, 5);
  const auto b = sample_poisson(f, 500.0, Box::cube(2, 0.0, 1.0), 77, 5);
  const auto c = sample_poisson(f, 500.0, Box::cube(2, 0.0, 1.0), 77, 6);
  CHECK(a.coords() == b.coords());
  CHECK(a.coords() != c.coords());
  CHECK(a.meta().seed == 77);
  CHECK(a.meta().stream == 5);
}

TEST_CASE("binomial configurations") {
  const auto u = DensityModel::constant(2, 1.0, Box::cube(2, 0.0, 1.0));
  const Box box = Box::cube(2, 0.0, 1.0);
  CHECK(sample_binomial(u, 0, box, 1).size() == 0);
  CHECK(sample_binomial(u, 5, box, 1).size() == 5);

  // multinomial cell counts for a step density with cell masses 0.1, 0.2, 0.3, 0.4
  const auto step = DensityModel::step(Box::cube(1, 0.0, 1.0), {4}, {0.4, 0.8, 1.2, 1.6});
  const auto pts = sample_binomial(step, 40000, Box::cube(1, 0.0, 1.0), 3);
  std::array<double, 4> cells{};
  for (std::size_t i = 0; i < pts.size(); ++i) cells[std::min<std::size_t>(3, static_cast<std::size_t>(pts[i][0] * 4))] += 1;
  double chi2 = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double e = 40000.0 * 0.1 * (j + 1);
    chi2 += (cells[j] - e) * (cells[j] - e) / e;
  }
  boost::math::chi_squared dist(3);
  CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 1e-4);

  const auto not_normalized = DensityModel::constant(2, 2.0, Box::cube(2, 0.0, 1.0));
  CHECK_THROWS_AS(sample_binomial(not_normalized, 3, box, 1), Error);
}

TEST_CASE("coupled sandwich layers") {
  const Box box = Box::cube(2, 0.0, 1.0);
  const auto phi = DensityModel::linear(2, 1.0, 1.0, box);
  SUBCASE("identical layers when f1 = phi = f2") {
    const auto l = sample_coupled_sandwich(phi, phi, phi, 300.0, box, 4);
    CHECK(l.lower.coords() == l.mid.coords());
    CHECK(l.mid.coords() == l.upper.coords());
  }
  SUBCASE("f1 = 0 gives an empty lower layer") {
    const auto zero = DensityModel::constant(2, 0.0, box);
    const auto two = DensityModel::constant(2, 2.0, box);
    const auto l = sample_coupled_sandwich(phi, zero, two, 300.0, box, 4);
    CHECK(l.lower.empty());
    CHECK(l.mid.size() <= l.upper.size());
  }
  SUBCASE("layers are nested") {
    const auto one = DensityModel::constant(2, 1.0, box);
    const auto two = DensityModel::constant(2, 2.0, box);
    const auto l = sample_coupled_sandwich(phi, one, two, 500.0, box, 8);
    auto contains = [](const PointConfig& big, PointView p) {
      for (std::size_t i = 0; i < big.size(); ++i) {
        if (big[i][0] == p[0] && big[i][1] == p[1]) return true;
      }
      return false;
    };
    CHECK(l.lower.size() <= l.mid.size());
    CHECK(l.mid.size() <= l.upper.size());
    for (std::size_t i = 0; i < l.lower.size(); ++i) CHECK(contains(l.mid, l.lower[i]));
    for (std::size_t i = 0; i < l.mid.size(); ++i) CHECK(contains(l.upper, l.mid[i]));
    CHECK(l.lower.meta().layer == "lower");
    CHECK(l.upper.meta().layer == "upper");
  }
  SUBCASE("ordering violation") {
    const auto half = DensityModel::constant(2, 0.5, box);
    const auto one = DensityModel::constant(2, 1.0, box);
    try {
      sample_coupled_sandwich(half, one, one, 10.0, box, 1);
      FAIL("expected ordering_violation");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ordering_violation);
    }
  }
}

TEST_CASE("restrict partitions a configuration") {
  const auto f = DensityModel::constant(2, 1.0, Box::cube(2, 0.0, 1.0));
  const auto pts = sample_poisson(f, 1000.0, Box::cube(2, 0.0, 1.0), 12);
  const auto left = restrict(pts, Box({0.0, 0.0}, {0.5, 1.0}));
  const auto right = restrict(pts, Box({0.5, 0.0}, {1.0, 1.0}));
  CHECK(left.size() + right.size() == pts.size());
  const ConvexPolygon tri{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
  const auto inside = restrict(pts, Window(tri));
  for (std::size_t i = 0; i < inside.size(); ++i) CHECK(inside[i][0] + inside[i][1] <= 1.0);
  CHECK(inside.size() < pts.size());
}

TEST_CASE("csv and metadata output") {
  PointConfig c(2, GeneratorMeta{GeneratorKind::binomial, 2.0, 1, 0, Box::cube(2, 0.0, 1.0), ""});
  const std::array<double, 2> p{0.25, 0.5};
  c.push_back(p);
  c.push_back(p);
  CHECK(c.has_duplicates());
  std::ostringstream os;
  c.write_csv(os);
  CHECK(os.str().rfind("x1,x2\n", 0) == 0);
  CHECK(c.metadata_json().find("binomial") != std::string::npos);
}
