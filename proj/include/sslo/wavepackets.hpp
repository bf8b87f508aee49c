#ifndef SSLO_WAVEPACKETS_HPP
#define SSLO_WAVEPACKETS_HPP

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "sslo/fft.hpp"
#include "sslo/gevrey.hpp"
#include "sslo/quadrature.hpp"
#include "sslo/sectorization.hpp"

namespace sslo {

struct NormalizeResult {
  double c_norm = 0.0;
  bool converged = true;
  double delta_rel = 0.0;  // relative change when doubling the node count
};

// Shared immutable setup for one (R, s): cutoff families, the frame lattice
// constant c*, and per-scale normalization constants (k-independent because
// the angular families are rotation symmetric).
class FrameContext {
 public:
  static FrameContext make(double R, double s, int j_min = -24) {
    int j_max = 0;
    if (!dyadic_exponent(R, &j_max) || j_max < 1)
      throw std::invalid_argument("FrameContext: R must be dyadic >= 2");
    FrameContext ctx(j_max, s);
    for (int j = 0; j <= j_max; ++j)
      ctx.angular_.emplace(j, AngularCutoffFamily(int(arc_count(j, j_max)), s));
    for (int j = j_max; j >= j_min; --j)
      ctx.c_norm_[j] = ctx.normalize_scale(j, 256).c_norm;
    return ctx;
  }

  double R() const { return R_; }
  int j_max() const { return j_max_; }
  double s() const { return s_; }
  double c_star() const { return c_star_; }
  const RadialCutoffFamily& radial() const { return radial_; }

  // interior scales own their arc family; boundary packets use the j = 0 one
  const AngularCutoffFamily& angular(int j) const {
    return angular_.at(std::max(j, 0));
  }

  double norm_constant(int j) const {
    auto it = c_norm_.find(j);
    if (it == c_norm_.end())
      throw std::out_of_range("norm_constant: scale not precomputed");
    return it->second;
  }
  int min_norm_scale() const { return c_norm_.begin()->first; }

  // Tensor Gauss-Legendre quadrature of || 2^{-j} phi_j eta_{j,1} ||^2
  // (interior) or || 2^{-j/2} phi_j eta_{0,1} ||^2 (boundary) in polar
  // coordinates with the r weight, node count doubled until 1e-8 relative
  // stability; returns the reciprocal square root.
  NormalizeResult normalize_scale(int j, int nodes) const {
    NormalizeResult res;
    double prev = norm_sq_quadrature(j, nodes);
    for (int n = 2 * nodes; n <= 16 * nodes; n *= 2) {
      double cur = norm_sq_quadrature(j, n);
      res.delta_rel = std::abs(cur - prev) / cur;
      prev = cur;
      if (res.delta_rel <= 1e-8) break;
    }
    res.converged = res.delta_rel <= 1e-8;
    res.c_norm = 1.0 / std::sqrt(prev);
    return res;
  }

 private:
  FrameContext(int j_max, double s)
      : j_max_(j_max), R_(std::ldexp(1.0, j_max)), s_(s),
        c_star_(frame_c_star()), radial_(j_max, s) {}

  double norm_sq_quadrature(int j, int nodes) const {
    const auto& ang = angular(j);
    auto [rlo, rhi] = radial_.support(j);
    rhi = std::min(rhi, R_ * (1.0 - 1e-15));
    auto rr = gl_on(rlo, rhi, nodes);
    double rad = 0.0;
    for (int i = 0; i < nodes; ++i)
      rad += rr.w[i] * sqr(radial_.phi_unchecked(j, rr.x[i])) * rr.x[i];
    double angsum = 0.0;
    if (ang.arc_count() == 1) {
      angsum = kTwoPi;
    } else {
      auto [tlo, thi] = ang.arc_star(1);
      auto tt = gl_on(tlo, thi, nodes);
      for (int i = 0; i < nodes; ++i) angsum += tt.w[i] * sqr(ang.eta(1, tt.x[i]));
    }
    double amp = j >= 0 ? std::ldexp(1.0, -2 * j) : std::ldexp(1.0, -j);
    return amp * rad * angsum;
  }

  int j_max_;
  double R_;
  double s_;
  double c_star_;
  RadialCutoffFamily radial_;
  std::map<int, AngularCutoffFamily> angular_;
  std::map<int, double> c_norm_;
};

// nu = (j, k, m) with evaluation, normalization, and sector support
class WavePacket {
 public:
  WavePacket(PacketIndex nu, const FrameContext& ctx) : nu_(nu), ctx_(&ctx) {
    if (nu.j > ctx.j_max()) throw std::invalid_argument("WavePacket: j > j_max");
    long mk = arc_count(nu.j, ctx.j_max());
    if (nu.k < 1 || nu.k > mk) throw std::invalid_argument("WavePacket: k range");
    c_norm_ = ctx.norm_constant(nu.j);
  }

  const PacketIndex& index() const { return nu_; }
  double norm_constant() const { return c_norm_; }
  bool interior() const { return nu_.j >= 0; }

  Sector sector() const { return Sector{nu_.j, nu_.k, ctx_->R(), ctx_->j_max()}; }

  // interior: frequency vector c* 2^{-j} m the transform concentrates about
  Vec2 freq_center() const {
    double a = ctx_->c_star() * std::ldexp(1.0, -nu_.j);
    return {a * nu_.m[0], a * nu_.m[1]};
  }

  std::complex<double> eval(Vec2 x) const {
    double r = x.norm();
    if (r >= ctx_->R()) return 0.0;
    double phi = ctx_->radial().phi_unchecked(nu_.j, r);
    if (phi == 0.0) return 0.0;
    double theta = arg_2pi(x);
    const auto& ang = ctx_->angular(nu_.j);
    double eta = ang.eta(nu_.k, theta);
    if (eta == 0.0) return 0.0;
    if (interior()) {
      double amp = c_norm_ * std::ldexp(1.0, -nu_.j) * phi * eta;
      double phase = ctx_->c_star() * std::ldexp(1.0, -nu_.j) *
                     (nu_.m[0] * x.x + nu_.m[1] * x.y);
      return std::polar(amp, phase);
    }
    double amp = c_norm_ * std::pow(2.0, -0.5 * nu_.j) * phi * eta;
    double phase = 0.5 * (nu_.m[0] * std::ldexp(1.0, -nu_.j) * r +
                          nu_.m[1] * ctx_->R() * theta);
    return std::polar(amp, phase);
  }

 private:
  PacketIndex nu_;
  const FrameContext* ctx_;
  double c_norm_;
};

inline NormalizeResult normalize(const PacketIndex& nu, const FrameContext& ctx,
                                 int nodes = 256) {
  return ctx.normalize_scale(nu.j, nodes);
}

// Per-sector analysis coefficients <f, psi_{j,k,m}> for all m in the DFT box,
// computed with one FFT of the windowed sample on the sector's bounding box
// (interior: the universal square; boundary: the (r, theta) rectangle with
// the r Jacobian folded into the samples).
struct SectorCoefficients {
  int j = 0, k = 1;
  int n0 = 0, n1 = 0;  // DFT sizes; m1 in [-n0/2, n0/2), m2 in [-n1/2, n1/2)
  std::vector<std::complex<double>> coeff;  // row-major (m1 + n0/2, m2 + n1/2)
  double window_norm_sq = 0.0;  // discrete || f phi eta ||^2 (dx measure)

  std::complex<double> at(long m1, long m2) const {
    long i = m1 + n0 / 2, l = m2 + n1 / 2;
    if (i < 0 || i >= n0 || l < 0 || l >= n1)
      throw std::out_of_range("SectorCoefficients::at");
    return coeff[std::size_t(i) * n1 + l];
  }

  double sum_sq_box(long m_box) const {
    long b1 = std::min<long>(m_box, n0 / 2 - 1);
    long b2 = std::min<long>(m_box, n1 / 2 - 1);
    NeumaierSum s;
    for (long m1 = -b1; m1 <= b1; ++m1)
      for (long m2 = -b2; m2 <= b2; ++m2)
        s.add(std::norm(at(m1, m2)));
    return s.value();
  }

  double sum_sq_all() const {
    NeumaierSum s;
    for (const auto& c : coeff) s.add(std::norm(c));
    return s.value();
  }
};

inline SectorCoefficients analysis_coefficients(
    const std::function<std::complex<double>(Vec2)>& f, int j, int k,
    const FrameContext& ctx, int grid_n = 512, int grid_nt = 0) {
  SectorCoefficients out;
  out.j = j;
  out.k = k;
  const double C = ctx.norm_constant(j);

  if (j >= 0) {
    const int n = grid_n;
    out.n0 = out.n1 = n;
    out.coeff.resize(std::size_t(n) * n);
    Sector sec{j, k, ctx.R(), ctx.j_max()};
    double side = c_star_square_universal() * std::ldexp(1.0, j);
    // center the universal square on the exact bounding box of S*
    double r0 = sec.r_star_lo(), r1 = sec.r_star_hi();
    double a = sec.theta_star_lo(), b = sec.theta_star_hi();
    auto [xlo, xhi] = detail::rcos_range(r0, r1, a, b);
    auto [ylo, yhi] = detail::rcos_range(r0, r1, a - kPi / 2, b - kPi / 2);
    double cx = 0.5 * (xlo + xhi), cy = 0.5 * (ylo + yhi);
    double x0 = cx - side / 2, y0 = cy - side / 2;
    double h = side / n;
    const auto& ang = ctx.angular(j);
    const auto& rad = ctx.radial();
    std::vector<std::complex<double>> g(std::size_t(n) * n);
    NeumaierSum wn;
    for (int q = 0; q < n; ++q) {
      double x = x0 + h * q;
      for (int p = 0; p < n; ++p) {
        double y = y0 + h * p;
        double r = std::hypot(x, y);
        std::complex<double> val = 0.0;
        if (r < ctx.R()) {
          double w = rad.phi_unchecked(j, r);
          if (w != 0.0) {
            double et = ang.eta(k, arg_2pi({x, y}));
            if (et != 0.0) val = f({x, y}) * (w * et);
          }
        }
        g[std::size_t(q) * n + p] = val;
        wn.add(std::norm(val));
      }
    }
    out.window_norm_sq = wn.value() * h * h;
    fft_2d(g.data(), n, n, FFTW_FORWARD);
    double lat = ctx.c_star() * std::ldexp(1.0, -j);  // frequency spacing
    double amp = C * std::ldexp(1.0, -j) * h * h;
    for (long m1 = -n / 2; m1 < n / 2; ++m1)
      for (long m2 = -n / 2; m2 < n / 2; ++m2) {
        long q = (m1 % n + n) % n, p = (m2 % n + n) % n;
        double ph = -lat * (m1 * x0 + m2 * y0);
        out.coeff[std::size_t(m1 + n / 2) * n + (m2 + n / 2)] =
            amp * std::polar(1.0, ph) * g[std::size_t(q) * n + p];
      }
    return out;
  }

  // boundary sector: the radial box is 19x wider than supp(phi_j), so the
  // radial grid count leads the angular one
  const int nr = grid_n, nt = grid_nt > 0 ? grid_nt : grid_n;
  out.n0 = nr;
  out.n1 = nt;
  out.coeff.resize(std::size_t(nr) * nt);
  const auto& ang = ctx.angular(0);
  auto [ilo, ihi] = ctx.radial().support(j);
  double rc = 0.5 * (ilo + ihi);
  double rhw = kTwoPi * std::ldexp(1.0, j);  // |I~_j| = 4 pi 2^j
  double r0 = rc - rhw, r1 = rc + rhw;
  auto [tlo, thi] = ang.arc_star(k);
  double tc = 0.5 * (tlo + thi);
  double thw = kTwoPi / ctx.R();  // |Theta~| = 4 pi / R
  double t0 = tc - thw;
  double hr = (r1 - r0) / nr, ht = 2 * thw / nt;
  const auto& rad = ctx.radial();
  std::vector<std::complex<double>> g(std::size_t(nr) * nt);
  NeumaierSum wn;
  for (int q = 0; q < nr; ++q) {
    double r = r0 + hr * q;
    for (int p = 0; p < nt; ++p) {
      double th = t0 + ht * p;
      std::complex<double> val = 0.0;
      if (r > 0 && r < ctx.R()) {
        double w = rad.phi_unchecked(j, r);
        if (w != 0.0) {
          double et = ang.eta(k, th);
          if (et != 0.0)
            val = f({r * std::cos(th), r * std::sin(th)}) * (w * et * r);
        }
      }
      g[std::size_t(q) * nt + p] = val;
      if (r > 0) wn.add(std::norm(val) / r);  // |f phi eta|^2 r dr dtheta
    }
  }
  out.window_norm_sq = wn.value() * hr * ht;
  fft_2d(g.data(), nr, nt, FFTW_FORWARD);
  double wr = std::ldexp(0.5, -j);  // radial frequency spacing 2^{-j-1}
  double wt = ctx.R() / 2.0;
  double amp = C * std::pow(2.0, -0.5 * j) * hr * ht;
  for (long m1 = -nr / 2; m1 < nr / 2; ++m1)
    for (long m2 = -nt / 2; m2 < nt / 2; ++m2) {
      long q = (m1 % nr + nr) % nr, p = (m2 % nt + nt) % nt;
      double ph = -(wr * m1 * r0 + wt * m2 * t0);
      out.coeff[std::size_t(m1 + nr / 2) * nt + (m2 + nt / 2)] =
          amp * std::polar(1.0, ph) * g[std::size_t(q) * nt + p];
    }
  return out;
}

// Full-lattice coefficient energy of one sector via the Parseval identity of
// the bounding-box exponential basis:
//   interior:  sum_m |<f, psi>|^2 = (C_{j,k} C*)^2 || f phi eta ||^2
//   boundary:  sum_m |<f, psi>|^2 = C^2 2^{-j} |B~| int |f phi eta|^2 r^2
// evaluated with polar Gauss-Legendre quadrature on the sector support.
struct SectorFrameSum {
  double total = 0.0;     // full-lattice sum
  double window_norm_sq = 0.0;  // || f phi eta ||^2 in L2(dx)
};

inline SectorFrameSum sector_frame_sum(
    const std::function<std::complex<double>(Vec2)>& f, int j, int k,
    const FrameContext& ctx, int nodes = 96) {
  SectorFrameSum out;
  const auto& rad = ctx.radial();
  const auto& ang = ctx.angular(j);
  auto [rlo, rhi] = rad.support(j);
  rhi = std::min(rhi, ctx.R() * (1 - 1e-14));
  auto rr = gl_on(rlo, rhi, 2 * nodes);
  double tlo, thi;
  if (ang.arc_count() == 1) {
    tlo = 0.0;
    thi = kTwoPi;
  } else {
    std::tie(tlo, thi) = ang.arc_star(k);
  }
  auto tt = gl_on(tlo, thi, nodes);
  NeumaierSum n1, n2;  // r and r^2 weighted window norms
  for (std::size_t i = 0; i < rr.x.size(); ++i) {
    double r = rr.x[i];
    double w = rad.phi_unchecked(j, r);
    if (w == 0.0) continue;
    double acc1 = 0.0, acc2 = 0.0;
    for (std::size_t l = 0; l < tt.x.size(); ++l) {
      double th = tt.x[l];
      double et = ang.eta(k, th);
      if (et == 0.0) continue;
      double v = std::norm(f({r * std::cos(th), r * std::sin(th)})) * sqr(w * et);
      acc1 += v * tt.w[l];
      acc2 += v * tt.w[l] * r;
    }
    n1.add(acc1 * rr.w[i] * r);
    n2.add(acc2 * rr.w[i] * r);
  }
  out.window_norm_sq = n1.value();
  double C = ctx.norm_constant(j);
  if (j >= 0) {
    out.total = sqr(C * c_star_square_universal()) * n1.value();
  } else {
    double box_area = (2 * kTwoPi * std::ldexp(1.0, j)) * (2 * kTwoPi / ctx.R());
    out.total = sqr(C) * std::ldexp(1.0, -j) * box_area * n2.value();
  }
  return out;
}

enum class TrialKind { BumpMixture, BandLimited };

struct TestFunction {
  std::function<std::complex<double>(Vec2)> f;
  double norm_sq = 0.0;  // over D(R)
};

// Gaussian bumps with random centers in D(R-1) and widths in [0.5, 2], or
// band-limited noise with spectrum in |xi| <= 2.
inline TestFunction random_test_function(const FrameContext& ctx, TrialKind kind,
                                         std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  TestFunction tf;
  double R = ctx.R();
  if (kind == TrialKind::BumpMixture) {
    struct Bump { Vec2 c; double w; std::complex<double> a; };
    auto bumps = std::make_shared<std::vector<Bump>>();
    for (int i = 0; i < 6; ++i) {
      Vec2 c;
      do {
        c = {(2 * uni(rng) - 1) * (R - 1), (2 * uni(rng) - 1) * (R - 1)};
      } while (c.norm() > R - 1);
      double w = 0.5 + 1.5 * uni(rng);
      bumps->push_back({c, w, {gauss(rng), gauss(rng)}});
    }
    tf.f = [bumps](Vec2 x) {
      std::complex<double> v = 0.0;
      for (const auto& b : *bumps)
        v += b.a * std::exp(-(x - b.c).norm2() / (2 * b.w * b.w));
      return v;
    };
  } else {
    struct Wave { Vec2 xi; std::complex<double> a; };
    auto waves = std::make_shared<std::vector<Wave>>();
    for (int i = 0; i < 32; ++i) {
      Vec2 xi;
      do {
        xi = {(2 * uni(rng) - 1) * 2, (2 * uni(rng) - 1) * 2};
      } while (xi.norm() > 2.0);
      waves->push_back({xi, {gauss(rng), gauss(rng)}});
    }
    tf.f = [waves](Vec2 x) {
      std::complex<double> v = 0.0;
      for (const auto& w : *waves)
        v += w.a * std::polar(1.0, w.xi.dot(x));
      return v;
    };
  }
  // || f ||^2 over D(R) by polar tensor quadrature
  int nr = 256, nt = 512;
  auto rr = gl_on(0.0, R, nr);
  NeumaierSum s;
  for (int i = 0; i < nr; ++i) {
    double acc = 0.0;
    for (int l = 0; l < nt; ++l) {
      double th = kTwoPi * l / nt;
      acc += std::norm(tf.f({rr.x[i] * std::cos(th), rr.x[i] * std::sin(th)}));
    }
    s.add(acc * rr.w[i] * rr.x[i] * kTwoPi / nt);
  }
  tf.norm_sq = s.value();
  return tf;
}

struct SectorStats {
  int j = 0;
  double c0 = std::numeric_limits<double>::infinity();  // min Sum/||f phi eta||^2
  double C0 = 0.0;                                      // max
};

struct FrameEstimate {
  double A_hat = 0.0;
  double B_hat = 0.0;
  std::vector<double> ratios;          // per trial
  double max_m_tail_fraction = 0.0;    // analytic beyond-box part of the sum
  double max_shell_tail_fraction = 0.0;  // excluded deep-ladder mass / ||f||^2
  bool reliable = true;                // shell truncation below 1% of ||f||^2
  std::vector<SectorStats> per_scale;  // measured sandwich constants
};

struct FrameOpts {
  int grid_interior = 256;   // FFT grids exhibiting the m-box coefficients
  int grid_boundary_r = 1024;
  int grid_boundary_t = 256;
  int quad_nodes = 96;       // polar quadrature for the Parseval totals
  int j_min = -13;           // boundary ladder truncation for frame sums
  long m_box = 64;           // coefficient box summed explicitly per sector
  double sector_skip_tol = 1e-9;  // FFT only sectors carrying window mass
};

// Frame ratio sum_nu |<f, psi_nu>|^2 / ||f||^2 over random test functions.
// Per sector the m-box coefficients come from the DFT; the mass beyond the
// box is bounded analytically by the bounding-box Parseval identity and
// added in. Packets below the ladder truncation j_min are excluded; their
// mass is bounded by the shell norm times the worst sandwich constant and
// drives the reliability flag.
inline FrameEstimate frame_bounds_estimate(const FrameContext& ctx, int trials,
                                           TrialKind kind, std::uint64_t seed,
                                           const FrameOpts& opts = {}) {
  if (trials < 1) throw std::invalid_argument("frame_bounds_estimate: trials >= 1");
  if (opts.j_min < ctx.min_norm_scale())
    throw std::invalid_argument("frame_bounds_estimate: j_min below precomputed scales");
  FrameEstimate est;
  est.A_hat = std::numeric_limits<double>::infinity();
  std::map<int, SectorStats> stats;

  for (int t = 0; t < trials; ++t) {
    TestFunction tf = random_test_function(ctx, kind, seed + 1000003ULL * t);
    NeumaierSum total, m_tail;
    for (int j = ctx.j_max(); j >= opts.j_min; --j) {
      long mk = arc_count(j, ctx.j_max());
      std::vector<double> totals(mk, 0.0), boxes(mk, 0.0), wnorm(mk, 0.0);
      parallel_for(std::size_t(mk), [&](std::size_t ki) {
        auto fs = sector_frame_sum(tf.f, j, int(ki + 1), ctx, opts.quad_nodes);
        totals[ki] = fs.total;
        wnorm[ki] = fs.window_norm_sq;
        if (fs.window_norm_sq > opts.sector_skip_tol * tf.norm_sq) {
          auto sc = j >= 0 ? analysis_coefficients(tf.f, j, int(ki + 1), ctx,
                                                   opts.grid_interior)
                           : analysis_coefficients(tf.f, j, int(ki + 1), ctx,
                                                   opts.grid_boundary_r,
                                                   opts.grid_boundary_t);
          boxes[ki] = std::min(sc.sum_sq_box(opts.m_box), totals[ki]);
        }
      });
      auto& st = stats[j];
      st.j = j;
      for (long ki = 0; ki < mk; ++ki) {
        total.add(totals[ki]);
        m_tail.add(totals[ki] - boxes[ki]);
        if (wnorm[ki] > opts.sector_skip_tol * tf.norm_sq) {
          double ratio = totals[ki] / wnorm[ki];
          st.c0 = std::min(st.c0, ratio);
          st.C0 = std::max(st.C0, ratio);
        }
      }
    }
    // mass below the truncated boundary ladder: shell of width 1.1 2^{j_min}
    double shell_lo = ctx.R() - 1.1 * std::ldexp(1.0, opts.j_min);
    int nr = 64, nt = 512;
    auto rr = gl_on(shell_lo, ctx.R(), nr);
    NeumaierSum shell;
    for (int i = 0; i < nr; ++i) {
      double acc = 0.0;
      for (int l = 0; l < nt; ++l) {
        double th = kTwoPi * l / nt;
        acc += std::norm(tf.f({rr.x[i] * std::cos(th), rr.x[i] * std::sin(th)}));
      }
      shell.add(acc * rr.w[i] * rr.x[i] * kTwoPi / nt);
    }
    double C0_worst = 0.0;
    for (auto& [j, st] : stats) C0_worst = std::max(C0_worst, st.C0);
    est.max_shell_tail_fraction =
        std::max(est.max_shell_tail_fraction,
                 C0_worst * shell.value() / std::max(tf.norm_sq, 1e-300));
    est.max_m_tail_fraction = std::max(
        est.max_m_tail_fraction, m_tail.value() / std::max(total.value(), 1e-300));

    double ratio = total.value() / tf.norm_sq;
    est.ratios.push_back(ratio);
    est.A_hat = std::min(est.A_hat, ratio);
    est.B_hat = std::max(est.B_hat, ratio);
  }
  est.reliable = est.max_shell_tail_fraction <= 0.01;
  for (auto& [j, st] : stats) est.per_scale.push_back(st);
  return est;
}

struct MixedDerivFit {
  double C1 = 0.0, C2 = 0.0;
  std::map<std::pair<int, int>, double> sup;  // alpha = (a, b) -> sup |d^alpha h|
  bool fit_ok = false;
};

// Cartesian partials of the envelope h_{j,k}(x) = phi_j(|x|) eta_{j,k}(arg x),
// fitted to C1 C2^{|a|} 2^{-j|a|} (a!)^s.
inline MixedDerivFit mixed_derivative_check(const FrameContext& ctx, int j, int k,
                                            int order = 3, int grid = 160) {
  if (j < 0) throw std::invalid_argument("mixed_derivative_check: interior only");
  if (order > 3) throw std::invalid_argument("mixed_derivative_check: order <= 3");
  Sector sec{j, k, ctx.R(), ctx.j_max()};
  auto h = [&](double x, double y) -> double {
    double r = std::hypot(x, y);
    if (r >= ctx.R()) return 0.0;
    double w = ctx.radial().phi_unchecked(j, r);
    if (w == 0.0) return 0.0;
    return w * ctx.angular(j).eta(k, arg_2pi({x, y}));
  };
  double r0 = sec.r_star_lo(), r1 = sec.r_star_hi();
  double a = sec.theta_star_lo(), b = sec.theta_star_hi();
  auto [xlo, xhi] = detail::rcos_range(r0, r1, a, b);
  auto [ylo, yhi] = detail::rcos_range(r0, r1, a - kPi / 2, b - kPi / 2);
  double step = std::ldexp(1.0, j) * 2e-4;

  MixedDerivFit fit;
  for (int ax = 0; ax <= order; ++ax)
    for (int ay = 0; ax + ay <= order; ++ay) fit.sup[{ax, ay}] = 0.0;

  for (int qi = 0; qi <= grid; ++qi) {
    double x = xlo + (xhi - xlo) * qi / grid;
    for (int pi = 0; pi <= grid; ++pi) {
      double y = ylo + (yhi - ylo) * pi / grid;
      if (h(x, y) == 0.0 && qi % 4 != 0) continue;
      for (auto& [alpha, sup] : fit.sup) {
        auto [ax, ay] = alpha;
        // central differences, nested over the two axes
        double acc = 0.0;
        auto cd = [&](auto&& fy, int k_ord) -> double {
          if (k_ord == 0) return fy(0.0);
          if (k_ord == 1)
            return (fy(step) - fy(-step)) / (2 * step);
          if (k_ord == 2)
            return (fy(step) - 2 * fy(0.0) + fy(-step)) / (step * step);
          return (fy(2 * step) - 2 * fy(step) + 2 * fy(-step) - fy(-2 * step)) /
                 (2 * step * step * step);
        };
        auto gx = [&](double dx) {
          auto gy = [&](double dy) { return h(x + dx, y + dy); };
          return cd(gy, ay);
        };
        acc = cd(gx, ax);
        sup = std::max(sup, std::abs(acc));
      }
    }
  }
  fit.C1 = std::max(fit.sup[{0, 0}], 1.0);
  double c2 = 0.0;
  for (auto& [alpha, sup] : fit.sup) {
    auto [ax, ay] = alpha;
    int aa = ax + ay;
    if (aa == 0) continue;
    double fact = std::pow(std::tgamma(ax + 1.0) * std::tgamma(ay + 1.0), ctx.s());
    double need = sup * std::ldexp(1.0, j * aa) / (fit.C1 * fact);
    if (need > 0) c2 = std::max(c2, std::pow(need, 1.0 / aa));
  }
  fit.C2 = c2;
  fit.fit_ok = c2 <= 1e6;
  return fit;
}

}  // namespace sslo

#endif  // SSLO_WAVEPACKETS_HPP
