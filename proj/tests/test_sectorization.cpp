#include <catch2/catch_amalgamated.hpp>

#include "sslo/sectorization.hpp"

using namespace sslo;

TEST_CASE("classification is a sign test on j") {
  CHECK(classify({0, 1, {0, 0}}) == PacketClass::Interior);
  CHECK(classify({-1, 3, {2, -1}}) == PacketClass::Boundary);
  CHECK(classify({2, 1, {5, 5}}) == PacketClass::Interior);
}

TEST_CASE("arc counts") {
  // R = 4: m(0) = 4, m(1) = 2, m(2) = 1; m(j) = 4 for j < 0
  CHECK(arc_count(0, 2) == 4);
  CHECK(arc_count(1, 2) == 2);
  CHECK(arc_count(2, 2) == 1);
  CHECK(arc_count(-1, 2) == 4);
  CHECK(arc_count(-7, 2) == 4);
}

TEST_CASE("index set enumeration") {
  auto idx = build_index_set(4.0, -2, 1);
  // (4+2+1+4+4) sectors x 9 lattice points
  CHECK(idx.size() == 135);
  CHECK_THROWS_AS(build_index_set(5.0, -1, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_index_set(4.0, 1, 1), std::invalid_argument);
}

TEST_CASE("arc partition tiles the circle exactly") {
  for (int j = 0; j <= 3; ++j) {
    double prev_hi = 0.0;
    long mk = arc_count(j, 3);
    for (long k = 1; k <= mk; ++k) {
      Sector sec{j, int(k), 8.0, 3};
      CHECK(sec.theta_lo() == Catch::Approx(prev_hi).margin(1e-14));
      prev_hi = sec.theta_hi();
    }
    CHECK(prev_hi == Catch::Approx(kTwoPi));
  }
}

TEST_CASE("sector area accounting") {
  // sum of nominal sector areas over j_min <= j <= j_max approaches pi R^2
  double R = 8.0;
  int j_max = 3;
  double total = 0.0;
  int j_min = -30;
  for (int j = j_max; j >= j_min; --j) {
    double r_hi = std::max(0.0, R - std::ldexp(1.0, j - 1));
    double r_lo = std::max(0.0, R - std::ldexp(1.0, j));
    total += kPi * (r_hi * r_hi - r_lo * r_lo);  // all arcs together
  }
  CHECK(total == Catch::Approx(kPi * R * R).epsilon(1e-3));
}

TEST_CASE("every point lies in few enlarged sectors") {
  double R = 8.0;
  int j_max = 3;
  auto rng = make_rng(11);
  std::uniform_real_distribution<double> u(-R, R);
  int tested = 0;
  while (tested < 2000) {
    Vec2 x{u(rng), u(rng)};
    if (x.norm() >= R || x.norm() < 1e-6) continue;
    ++tested;
    int hits = 0;
    for (int j = j_max; j >= -20; --j) {
      long mk = arc_count(j, j_max);
      for (long k = 1; k <= mk; ++k) {
        Sector sec{j, int(k), R, j_max};
        if (sec.contains_star(x)) ++hits;
      }
    }
    CHECK(hits >= 1);
    CHECK(hits <= 6);
  }
}

TEST_CASE("bounding side matches a sampling oracle at (j=0, k=1), R=4") {
  Sector sec{0, 1, 4.0, 2};
  double side = sector_bounding_side(sec);
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  int n = 1000000;
  for (int i = 0; i <= n; ++i) {
    double t = sec.theta_star_lo() +
               (sec.theta_star_hi() - sec.theta_star_lo()) * i / n;
    for (double r : {sec.r_star_lo(), sec.r_star_hi()}) {
      xmin = std::min(xmin, r * std::cos(t));
      xmax = std::max(xmax, r * std::cos(t));
      ymin = std::min(ymin, r * std::sin(t));
      ymax = std::max(ymax, r * std::sin(t));
    }
  }
  double oracle = std::max(xmax - xmin, ymax - ymin);
  CHECK(side == Catch::Approx(oracle).margin(1e-9));
}

TEST_CASE("sides are scale covariant and bounded by the universal constant") {
  // side(2R, j+1, k) = 2 side(R, j, k)
  for (int j = 0; j <= 2; ++j) {
    long mk = arc_count(j, 2);
    for (long k = 1; k <= mk; ++k) {
      Sector a{j, int(k), 4.0, 2};
      Sector b{j + 1, int(k), 8.0, 3};
      CHECK(sector_bounding_side(b) ==
            Catch::Approx(2.0 * sector_bounding_side(a)).epsilon(1e-9));
    }
  }
  // universal constant dominates every ladder and is approached from below
  double cu = c_star_square_universal();
  for (int jm = 1; jm <= 10; ++jm) {
    auto rep = bounding_square_constant(std::ldexp(1.0, jm));
    CHECK(rep.ladder_max <= cu * (1 + 1e-12));
    CHECK(rep.universal == cu);
  }
  auto deep = bounding_square_constant(1024.0);
  CHECK(deep.ladder_max > 0.98 * cu);
  // c* = 2pi / C* lies in (0, 1) as the frame construction requires
  CHECK(frame_c_star() > 0.0);
  CHECK(frame_c_star() < 1.0);
}

TEST_CASE("core sector bounding square") {
  // S*_{j_max} is the disk of radius 0.55 R: side 1.1 R
  Sector core{3, 1, 8.0, 3};
  CHECK(core.r_star_lo() == 0.0);
  CHECK(core.r_star_hi() == Catch::Approx(0.55 * 8.0));
  CHECK(sector_bounding_side(core) == Catch::Approx(1.1 * 8.0));
}
