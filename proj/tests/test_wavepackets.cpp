#include <catch2/catch_amalgamated.hpp>

#include "sslo/wavepackets.hpp"

using namespace sslo;

namespace {
const FrameContext& ctx4() {
  static FrameContext c = FrameContext::make(4.0, 1.5, -14);
  return c;
}
const FrameContext& ctx8() {
  static FrameContext c = FrameContext::make(8.0, 1.5, -14);
  return c;
}

// measure || psi ||^2 by brute polar quadrature, independent of the
// normalization path (which factors the tensor product)
double packet_norm_sq(const WavePacket& p, const FrameContext& ctx, int nodes) {
  Sector sec = p.sector();
  auto rr = gl_on(std::max(0.0, sec.r_star_lo()),
                  std::min(sec.r_star_hi(), ctx.R() * (1 - 1e-14)), nodes);
  double tlo = sec.theta_star_lo(), thi = sec.theta_star_hi();
  if (sec.arcs() == 1) { tlo = 0.0; thi = kTwoPi; }
  auto tt = gl_on(tlo, thi, nodes);
  NeumaierSum s;
  for (int i = 0; i < nodes; ++i)
    for (int l = 0; l < nodes; ++l) {
      Vec2 x{rr.x[i] * std::cos(tt.x[l]), rr.x[i] * std::sin(tt.x[l])};
      s.add(std::norm(p.eval(x)) * rr.x[i] * rr.w[i] * tt.w[l]);
    }
  return s.value();
}
}  // namespace

TEST_CASE("unit norms at doubled quadrature, interior and boundary") {
  const auto& ctx = ctx4();
  auto rng = make_rng(31);
  std::uniform_int_distribution<int> um(-5, 5);
  for (int trial = 0; trial < 6; ++trial) {
    std::uniform_int_distribution<int> uj(0, ctx.j_max());
    int j = uj(rng);
    std::uniform_int_distribution<int> uk(1, int(arc_count(j, ctx.j_max())));
    WavePacket p({j, uk(rng), {um(rng), um(rng)}}, ctx);
    CHECK(std::abs(std::sqrt(packet_norm_sq(p, ctx, 384)) - 1.0) <= 1e-6);
  }
  for (int trial = 0; trial < 6; ++trial) {
    std::uniform_int_distribution<int> uj(-6, -1);
    int j = uj(rng);
    std::uniform_int_distribution<int> uk(1, int(arc_count(j, ctx.j_max())));
    WavePacket p({j, uk(rng), {um(rng), um(rng)}}, ctx);
    CHECK(std::abs(std::sqrt(packet_norm_sq(p, ctx, 384)) - 1.0) <= 1e-6);
  }
}

TEST_CASE("normalization is quadrature stable and k-independent") {
  const auto& ctx = ctx8();
  for (int j : {-3, -1, 0, 2, 3}) {
    auto res = ctx.normalize_scale(j, 256);
    CHECK(res.converged);
    CHECK(res.delta_rel <= 1e-8);
    CHECK(res.c_norm == Catch::Approx(ctx.norm_constant(j)).epsilon(1e-9));
  }
}

TEST_CASE("norm constants bounded above and below across scales and R") {
  for (double R : {4.0, 8.0, 16.0}) {
    auto ctx = FrameContext::make(R, 1.5, -10);
    double lo = 1e300, hi = 0.0;
    for (int j = -10; j <= ctx.j_max(); ++j) {
      double c = ctx.norm_constant(j);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    CHECK(lo > 0.05);
    CHECK(hi < 20.0);
    CHECK(hi / lo < 12.0);
  }
}

TEST_CASE("packet vanishes outside its enlarged sector") {
  const auto& ctx = ctx4();
  auto rng = make_rng(8);
  std::uniform_real_distribution<double> u(-4.2, 4.2);
  for (PacketIndex nu : {PacketIndex{0, 2, {3, -1}}, PacketIndex{-2, 1, {0, 5}}}) {
    WavePacket p(nu, ctx);
    Sector sec = p.sector();
    int found = 0;
    while (found < 1000) {
      Vec2 x{u(rng), u(rng)};
      if (sec.contains_star(x)) continue;
      ++found;
      CHECK(std::abs(p.eval(x)) == 0.0);
    }
  }
}

TEST_CASE("interior packet with zero modulation is nonnegative real") {
  const auto& ctx = ctx4();
  WavePacket p({1, 1, {0, 0}}, ctx);
  auto rng = make_rng(4);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int i = 0; i < 300; ++i) {
    auto v = p.eval({u(rng), u(rng)});
    CHECK(v.imag() == 0.0);
    CHECK(v.real() >= 0.0);
  }
}

TEST_CASE("|eval| does not depend on the modulation index") {
  const auto& ctx = ctx4();
  WavePacket a({0, 1, {0, 0}}, ctx), b({0, 1, {7, -9}}, ctx);
  auto rng = make_rng(12);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int i = 0; i < 300; ++i) {
    Vec2 x{u(rng), u(rng)};
    CHECK(std::abs(a.eval(x)) == Catch::Approx(std::abs(b.eval(x))).margin(1e-15));
  }
}

TEST_CASE("analysis coefficients: self inner product is 1") {
  const auto& ctx = ctx4();
  {
    PacketIndex nu{1, 2, {1, -2}};
    WavePacket p(nu, ctx);
    auto sc = analysis_coefficients([&](Vec2 x) { return p.eval(x); }, nu.j,
                                    nu.k, ctx, 512);
    CHECK(std::abs(sc.at(nu.m[0], nu.m[1]) - std::complex<double>(1.0, 0.0)) <= 1e-4);
    CHECK(sc.sum_sq_all() >= 1.0 - 1e-3);
  }
  {
    PacketIndex nu{-1, 3, {2, 1}};
    WavePacket p(nu, ctx);
    auto sc = analysis_coefficients([&](Vec2 x) { return p.eval(x); }, nu.j,
                                    nu.k, ctx, 8192, 512);
    CHECK(std::abs(sc.at(nu.m[0], nu.m[1]) - std::complex<double>(1.0, 0.0)) <= 1e-4);
    CHECK(sc.sum_sq_all() >= 1.0 - 1e-3);
  }
}

TEST_CASE("analysis coefficients: zero function, disjoint sector") {
  const auto& ctx = ctx4();
  auto zero = [](Vec2) { return std::complex<double>(0.0); };
  auto sc = analysis_coefficients(zero, 0, 1, ctx, 128);
  CHECK(sc.sum_sq_all() == 0.0);

  // packet living in a disjoint enlarged sector has all-zero coefficients
  WavePacket p({0, 1, {2, 2}}, ctx);
  auto f = [&](Vec2 x) { return p.eval(x); };
  auto far = analysis_coefficients(f, 0, 3, ctx, 128);
  CHECK(far.sum_sq_all() <= 1e-20);
}

TEST_CASE("per-sector Parseval sandwich is tight and scale stable") {
  const auto& ctx = ctx8();
  auto tf = random_test_function(ctx, TrialKind::BumpMixture, 555);
  double c0 = 1e300, C0 = 0.0;
  for (int j = 0; j <= ctx.j_max(); ++j) {
    long mk = arc_count(j, ctx.j_max());
    for (long k = 1; k <= mk; ++k) {
      auto fs = sector_frame_sum(tf.f, j, int(k), ctx, 96);
      if (fs.window_norm_sq < 1e-9 * tf.norm_sq) continue;
      double ratio = fs.total / fs.window_norm_sq;
      c0 = std::min(c0, ratio);
      C0 = std::max(C0, ratio);
    }
  }
  CHECK(c0 > 0.0);
  CHECK(C0 / c0 < 10.0);  // measured sandwich constants stay comparable
}

TEST_CASE("Parseval identity total matches the summed DFT coefficients") {
  const auto& ctx = ctx4();
  auto tf = random_test_function(ctx, TrialKind::BumpMixture, 77);
  {
    auto fs = sector_frame_sum(tf.f, 1, 2, ctx, 128);
    auto sc = analysis_coefficients(tf.f, 1, 2, ctx, 512);
    CHECK(sc.sum_sq_all() == Catch::Approx(fs.total).epsilon(2e-3));
  }
  {
    auto fs = sector_frame_sum(tf.f, -1, 1, ctx, 128);
    auto sc = analysis_coefficients(tf.f, -1, 1, ctx, 2048, 512);
    CHECK(sc.sum_sq_all() == Catch::Approx(fs.total).epsilon(2e-3));
  }
}

TEST_CASE("frame bounds: positive, finite, single-packet ratio >= 1") {
  const auto& ctx = ctx4();
  // f equal to one packet: its own coefficient already contributes 1
  WavePacket p({1, 1, {2, 1}}, ctx);
  auto sc = analysis_coefficients([&](Vec2 x) { return p.eval(x); }, 1, 1, ctx, 512);
  CHECK(sc.sum_sq_all() >= 1.0 - 1e-4);

  auto est = frame_bounds_estimate(ctx, 8, TrialKind::BumpMixture, 2024);
  CHECK(est.A_hat > 0.0);
  CHECK(est.B_hat < 1e4);
  CHECK(est.B_hat >= est.A_hat);
  CHECK(est.reliable);
}

TEST_CASE("mixed derivative fits scale as 2^{-j}") {
  const auto& ctx = ctx8();
  std::vector<double> grad_sup;
  for (int j : {0, 1, 2}) {
    auto fit = mixed_derivative_check(ctx, j, 1, 2, 120);
    REQUIRE(fit.fit_ok);
    CHECK(fit.sup[{0, 0}] <= 1.0 + 1e-9);
    double g = std::max(fit.sup[{1, 0}], fit.sup[{0, 1}]);
    grad_sup.push_back(g);
  }
  CHECK(grad_sup[0] / grad_sup[1] == Catch::Approx(2.0).epsilon(0.6));
  CHECK(grad_sup[1] / grad_sup[2] == Catch::Approx(2.0).epsilon(0.6));
}

TEST_CASE("mixed derivative fit constants are scale covariant") {
  auto c8 = FrameContext::make(8.0, 1.5, -2);
  auto c16 = FrameContext::make(16.0, 1.5, -2);
  auto f1 = mixed_derivative_check(c8, 1, 1, 2, 100);
  auto f2 = mixed_derivative_check(c16, 2, 1, 2, 100);
  CHECK(f2.C1 == Catch::Approx(f1.C1).epsilon(0.10));
  CHECK(f2.C2 == Catch::Approx(f1.C2).epsilon(0.10));
}
