#ifndef SSLO_FOURIER_HPP
#define SSLO_FOURIER_HPP

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "sslo/bessel.hpp"
#include "sslo/fft.hpp"
#include "sslo/geometry.hpp"
#include "sslo/wavepackets.hpp"

namespace sslo {

// ---------------------------------------------------------------------------
// angular Fourier factors

// Integer-frequency coefficients ang(k, q) = int_0^{2pi} eta_{j,k}(theta)
// e^{i q theta} d theta, from one FFT of eta_{j,1} plus the rotation phase
// ang_k(q) = e^{i q a_k} ang_1(q), a_k = 2pi (k-1)/m.
class AngularCoeffTable {
 public:
  AngularCoeffTable(const AngularCutoffFamily& fam, int q_max, int fft_size = 0)
      : m_(fam.arc_count()), q_max_(q_max) {
    int n = fft_size > 0 ? fft_size : 1 << 16;
    while (n < 8 * q_max) n *= 2;
    std::vector<std::complex<double>> buf(n);
    for (int i = 0; i < n; ++i) buf[i] = fam.eta(1, kTwoPi * i / n);
    fft_1d(buf.data(), n, FFTW_FORWARD);
    // int eta e^{iq theta} d theta = (2pi/n) sum eta_i e^{iq 2pi i/n} = (2pi/n) DFT_{-q}
    base_.resize(2 * q_max_ + 1);
    for (int q = -q_max_; q <= q_max_; ++q) {
      int idx = ((-q) % n + n) % n;
      base_[q + q_max_] = kTwoPi / n * buf[idx];
    }
  }

  int q_max() const { return q_max_; }
  long arc_count() const { return m_; }

  std::complex<double> at(int k, long q) const {
    if (std::abs(q) > q_max_) return 0.0;  // beyond certified decay range
    std::complex<double> c = base_[q + q_max_];
    if (k == 1) return c;
    double a = kTwoPi * double(k - 1) / double(m_);
    return c * std::polar(1.0, q * a);
  }

  double abs_at(long q) const {
    if (std::abs(q) > q_max_) return 0.0;
    return std::abs(base_[q + q_max_]);
  }

  double abs_peak() const {
    double p = 0.0;
    for (const auto& c : base_) p = std::max(p, std::abs(c));
    return p;
  }

  // smallest N such that all |ang(q)| with |q| >= N stay below tol. The FFT
  // noise floor (~1e-13 of the peak) caps the resolvable decay, so the
  // effective threshold never drops below it.
  int significant_range(double tol) const {
    double peak = 0.0;
    for (const auto& c : base_) peak = std::max(peak, std::abs(c));
    double eff = std::max(tol, 1e-12 * peak);
    int N = q_max_;
    double run = 0.0;
    for (int q = q_max_; q >= 0; --q) {
      run = std::max({run, abs_at(q), abs_at(-q)});
      if (run > eff) { N = q + 1; break; }
    }
    return std::min(N, q_max_);
  }

 private:
  long m_;
  int q_max_;
  std::vector<std::complex<double>> base_;
};

// ---------------------------------------------------------------------------
// radial Fourier factors (boundary packets), Jacobi-Anger pieces

// Psi_rad(rho) = int 2^{-j/2} r phi_j(r) e^{i m1 2^{-j-1} r} J_n(r rho) dr
// for all orders n = 0..n_max at once (one Bessel array per radial node).
inline std::vector<std::complex<double>> radial_factor_all_orders(
    const FrameContext& ctx, int j, long m1, double rho, int n_max,
    int nodes = 0) {
  auto [rlo, rhi] = ctx.radial().support(j);
  double w_r = std::abs(m1) * std::ldexp(0.5, -j) + rho;  // phase + Bessel rate
  int need = 64 + int(4.0 * w_r * (rhi - rlo) / kTwoPi);
  int n_nodes = nodes > 0 ? nodes : std::min(need, 4096);
  auto rr = gl_on(rlo, rhi, n_nodes);
  std::vector<std::complex<double>> out(n_max + 1, 0.0);
  double amp = std::pow(2.0, -0.5 * j);
  for (int i = 0; i < n_nodes; ++i) {
    double r = rr.x[i];
    double ph = ctx.radial().phi_unchecked(j, r);
    if (ph == 0.0) continue;
    auto jn = bessel::j_array(n_max, r * rho);
    std::complex<double> w =
        rr.w[i] * amp * r * ph * std::polar(1.0, 0.5 * m1 * std::ldexp(1.0, -j) * r);
    for (int n = 0; n <= n_max; ++n) out[n] += w * jn[n];
  }
  return out;
}

inline std::complex<double> radial_factor(const FrameContext& ctx, int j, long m1,
                                          int n, double rho) {
  auto all = radial_factor_all_orders(ctx, j, m1, rho, std::abs(n));
  std::complex<double> v = all[std::abs(n)];
  return n >= 0 || n % 2 == 0 ? v : -v;  // J_{-n} = (-1)^n J_n
}

// Lemma-shaped envelope R 2^{j/2} min{1, (10R/|n|)^{|n|}} used for the n-sum
// truncation certificate.
inline double radial_factor_envelope_log(double R, int j, long n) {
  double base = std::log(R) + 0.5 * j * std::log(2.0);
  if (std::abs(double(n)) <= 10.0 * R) return base;
  double an = std::abs(double(n));
  return base + an * (std::log(10.0 * R) - std::log(an));
}

// ---------------------------------------------------------------------------
// caches shared across packet transforms at one (R, s)

struct InteriorEnvelope {
  // |h_hat_j(w)| <= C_env 2^{2j} exp(-c_env (2^j |w|)^{1/s}) on the fitted
  // range, with domination enforced on samples
  double C_env = 0.0;
  double c_env = 0.0;
  double u_max = 0.0;  // fitted/validated out to this 2^j|w|
};

struct BoundaryEnvelope {
  // |psi_hat(xi)| <= C R 2^{j/2} exp(-c |m1|^{1/s}) exp(-c |m2|^{1/s}), |xi|<=1
  double C_env = 0.0;
  double c_env = 0.0;
};

class HatTable;  // below

class FourierCache {
 public:
  explicit FourierCache(const FrameContext& ctx) : ctx_(&ctx) {}

  const FrameContext& ctx() const { return *ctx_; }

  const AngularCoeffTable& angular_coeffs(int scale) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = ang_.find(scale);
    if (it == ang_.end()) {
      int q_max = 1 << 15;
      it = ang_.emplace(scale,
                        std::make_unique<AngularCoeffTable>(
                            ctx_->angular(scale), q_max)).first;
    }
    return *it->second;
  }

  const HatTable& hat_table(int j, double rho_max) const;
  InteriorEnvelope interior_envelope(int j) const;
  BoundaryEnvelope boundary_envelope() const;

 private:
  const FrameContext* ctx_;
  mutable std::mutex mu_;
  mutable std::map<int, std::unique_ptr<AngularCoeffTable>> ang_;
  mutable std::map<int, std::unique_ptr<HatTable>> hat_;
  mutable std::map<int, InteriorEnvelope> env_int_;
  mutable std::optional<BoundaryEnvelope> env_bdry_;
};

// ---------------------------------------------------------------------------
// polar table of the interior envelope transform
//
// h_hat_j(xi) for h = phi_j(r) eta_{j,1}(theta) via the polar factorization
//   h_hat(rho, phi) = (1/2pi) sum_n i^{-n} e^{-in phi} Psi_rad_n(rho) ang_n,
// tabulated on a uniform (rho, phi) grid with cubic interpolation. k > 1
// rotates the argument; modulation shifts it.
class HatTable {
 public:
  HatTable(const FrameContext& ctx, const AngularCoeffTable& ang, int j,
           double rho_max) : j_(j), rho_max_(rho_max) {
    // spectrum truncated at 1e-9 of the peak; anything beyond alias-packs
    // into the phi grid at the same magnitude, which the table accuracy
    // budget absorbs
    n_ang_ = ang.significant_range(1e-9 * ang.abs_peak());
    int L = 64;
    while (L < 4 * n_ang_ + 4 && L < 8192) L *= 2;
    n_phi_ = L;
    auto [rlo, rhi] = ctx.radial().support(j);
    double r_outer = rhi;
    double period = kTwoPi / std::max(r_outer, 1e-9);
    h_rho_ = period / 10.0;
    n_rho_ = int(rho_max / h_rho_) + 4;
    data_.resize(std::size_t(n_rho_) * n_phi_);

    int radial_nodes = 64 + int(4.0 * rho_max * (rhi - rlo) / kTwoPi);
    radial_nodes = std::min(radial_nodes, 4096);
    auto rr = gl_on(rlo, std::min(rhi, ctx.R() * (1 - 1e-14)), radial_nodes);
    std::vector<double> ph(radial_nodes);
    for (int i = 0; i < radial_nodes; ++i)
      ph[i] = ctx.radial().phi_unchecked(j, rr.x[i]) * rr.w[i] * rr.x[i];

    parallel_for(std::size_t(n_rho_), [&](std::size_t qi) {
      double rho = qi * h_rho_;
      // orders beyond the Bessel turning region contribute nothing
      int n_eff = std::min(n_ang_, int(1.3 * r_outer * rho) + 40);
      std::vector<double> prad(n_eff + 1, 0.0);
      for (int i = 0; i < radial_nodes; ++i) {
        if (ph[i] == 0.0) continue;
        auto jn = bessel::j_array(n_eff, rr.x[i] * rho);
        for (int n = 0; n <= n_eff; ++n) prad[n] += ph[i] * jn[n];
      }
      std::vector<std::complex<double>> sp(n_phi_, 0.0);
      for (int n = -n_eff; n <= n_eff; ++n) {
        double pr = prad[std::abs(n)];
        if (n < 0 && (n % 2)) pr = -pr;
        std::complex<double> in = std::polar(1.0, -0.5 * kPi * n);  // i^{-n}
        std::complex<double> coeff = ang.at(1, n);
        sp[(n % n_phi_ + n_phi_) % n_phi_] += in * pr * coeff / kTwoPi;
      }
      fft_1d(sp.data(), n_phi_, FFTW_FORWARD);  // values at phi_l = 2pi l / L
      for (int l = 0; l < n_phi_; ++l) data_[qi * n_phi_ + l] = sp[l];
    });
  }

  int scale() const { return j_; }
  double rho_max() const { return rho_max_; }

  bool covers(double rho) const { return rho <= (n_rho_ - 3) * h_rho_; }

  // cubic (Catmull-Rom) interpolation, periodic in phi
  std::complex<double> eval(Vec2 w) const {
    double rho = w.norm();
    if (!covers(rho)) throw std::domain_error("HatTable: rho beyond table");
    double phi = arg_2pi(w);
    double u = rho / h_rho_;
    int i1 = int(std::floor(u));
    double fu = u - i1;
    double v = phi / (kTwoPi / n_phi_);
    int l1 = int(std::floor(v));
    double fv = v - l1;
    std::complex<double> rows[4];
    for (int a = -1; a <= 2; ++a) {
      int ri = std::abs(i1 + a);  // reflect across rho = 0
      ri = std::min(ri, n_rho_ - 1);
      std::complex<double> cols[4];
      for (int b = -1; b <= 2; ++b) {
        int li = ((l1 + b) % n_phi_ + n_phi_) % n_phi_;
        cols[b + 1] = data_[std::size_t(ri) * n_phi_ + li];
      }
      rows[a + 1] = catmull(cols, fv);
    }
    return catmull(rows, fu);
  }

 private:
  static std::complex<double> catmull(const std::complex<double> p[4], double t) {
    return 0.5 * ((2.0 * p[1]) + (-p[0] + p[2]) * t +
                  (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) * (t * t) +
                  (-p[0] + 3.0 * p[1] - 3.0 * p[2] + p[3]) * (t * t * t));
  }

  int j_;
  double rho_max_;
  int n_ang_ = 0;
  int n_phi_ = 0;
  int n_rho_ = 0;
  double h_rho_ = 0.0;
  std::vector<std::complex<double>> data_;
};

inline const HatTable& FourierCache::hat_table(int j, double rho_max) const {
  // quantize the range to powers of two so growing requests do not thrash
  double quant = 16.0;
  while (quant < rho_max) quant *= 2.0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = hat_.find(j);
    if (it != hat_.end() && it->second->rho_max() >= rho_max) return *it->second;
  }
  const AngularCoeffTable& ang = angular_coeffs(j);
  auto fresh = std::make_unique<HatTable>(*ctx_, ang, j, quant);
  std::lock_guard<std::mutex> lock(mu_);
  auto& slot = hat_[j];
  if (!slot || slot->rho_max() < quant) slot = std::move(fresh);
  return *slot;
}

// ---------------------------------------------------------------------------
// packet transforms

struct FtOpts {
  // resolving the Gevrey flanks takes a few hundred Gauss-Legendre nodes;
  // endpoint clustering does the rest
  int base_nodes = 420;
  bool convergence_check = false;
};

// psi_hat(xi) = (1/2pi) int psi e^{-i x xi} dx by polar tensor quadrature over
// the enlarged sector, nodes adapted to the oscillation.
inline std::complex<double> packet_ft_direct(const WavePacket& p, Vec2 xi,
                                             const FtOpts& opts = {}) {
  const PacketIndex& nu = p.index();
  Sector sec = p.sector();
  double rlo = sec.r_star_lo(), rhi = sec.r_star_hi();
  double tlo = sec.theta_star_lo(), thi = sec.theta_star_hi();
  if (sec.arcs() == 1) { tlo = 0.0; thi = kTwoPi; }
  double rad_rate = xi.norm();
  double ang_rate = xi.norm() * rhi;
  if (nu.j >= 0) {
    double g = std::abs(frame_c_star()) * std::ldexp(1.0, -nu.j) *
               std::hypot(double(nu.m[0]), double(nu.m[1]));
    rad_rate += g;
    ang_rate += g * rhi;
  } else {
    rad_rate += 0.5 * std::abs(double(nu.m[0])) * std::ldexp(1.0, -nu.j);
    ang_rate += 0.5 * std::abs(double(nu.m[1])) * p.sector().R;
  }
  int nr = opts.base_nodes + int(3.0 * rad_rate * (rhi - rlo) / kPi);
  int nt = opts.base_nodes + int(3.0 * ang_rate * (thi - tlo) / kPi);
  nr = std::min(nr, 6000);
  nt = std::min(nt, 12000);
  auto rr = gl_on(rlo, rhi, nr);
  auto tt = gl_on(tlo, thi, nt);
  NeumaierSum re, im;
  for (int i = 0; i < nr; ++i) {
    double r = rr.x[i];
    std::complex<double> acc = 0.0;
    for (int l = 0; l < nt; ++l) {
      double th = tt.x[l];
      Vec2 x{r * std::cos(th), r * std::sin(th)};
      std::complex<double> v = p.eval(x);
      if (v != std::complex<double>(0.0))
        acc += tt.w[l] * v * std::polar(1.0, -x.dot(xi));
    }
    acc *= rr.w[i] * r;
    re.add(acc.real());
    im.add(acc.imag());
  }
  return std::complex<double>(re.value(), im.value()) / kTwoPi;
}

struct BesselFtResult {
  std::complex<double> value{0.0, 0.0};
  int n_used = 0;
  double tail_bound = 0.0;
  bool certified = true;  // tail bound < 1e-10
};

// Boundary-packet transform through the Jacobi-Anger factorization:
// (1/2pi) sum_n i^{-n} e^{-in phi} Psi_rad_{j,m1,n}(rho) Psi_ang_{k,m2,n}.
inline BesselFtResult packet_ft_boundary_bessel(const WavePacket& p, Vec2 xi,
                                                const FourierCache& cache) {
  const PacketIndex& nu = p.index();
  if (nu.j >= 0)
    throw std::invalid_argument("packet_ft_boundary_bessel: boundary packets only");
  const FrameContext& ctx = cache.ctx();
  double R = ctx.R();
  double rho = xi.norm(), phi = arg_2pi(xi);
  const AngularCoeffTable& ang = cache.angular_coeffs(0);

  long half = std::lround(nu.m[1] * R / 2.0);  // m2 R / 2 is an integer
  // n-range: past 20R the Bessel envelope is below 2^{-n}, giving a geometric
  // tail certificate; the angular range adds the coefficient decay width
  int n_bessel = int(std::ceil(20.0 * R)) + 8;
  int n_ang = ang.significant_range(1e-18 * R);
  int N = std::min(n_bessel + n_ang, ang.q_max() - int(std::abs(half)) - 1);
  N = std::max(N, 8);

  auto prad = radial_factor_all_orders(ctx, nu.j, nu.m[0], rho, N);
  std::complex<double> acc = 0.0;
  for (int n = -N; n <= N; ++n) {
    std::complex<double> pr = prad[std::abs(n)];
    if (n < 0 && (n % 2)) pr = -pr;
    std::complex<double> a = ang.at(nu.k, half + n);
    if (a == std::complex<double>(0.0)) continue;
    acc += std::polar(1.0, -0.5 * kPi * n - n * phi) * pr * a;
  }
  BesselFtResult res;
  res.value = p.norm_constant() * acc / kTwoPi;
  res.n_used = N;
  // |Psi_ang| <= |supp eta_{0,k}| = 2.2 pi / R; for n > N >= 20R the radial
  // envelope R 2^{j/2} (10R/n)^n is below R 2^{j/2} 2^{-n}
  if (N >= 20.0 * R) {
    double geo = std::ldexp(1.0, -(N - 1));  // 2 sum_{n > N} 2^{-n}
    res.tail_bound = p.norm_constant() / kTwoPi * (2.2 * kPi / R) * R *
                     std::pow(2.0, 0.5 * nu.j) * geo;
    res.certified = res.tail_bound < 1e-10;
  } else {
    res.tail_bound = std::numeric_limits<double>::infinity();
    res.certified = false;
  }
  return res;
}

// interior transform via the hat table: psi_hat(xi) = C 2^{-j} h_hat(xi - v)
inline std::complex<double> packet_ft_interior_table(const WavePacket& p, Vec2 xi,
                                                     const FourierCache& cache,
                                                     double rho_max_hint = 0.0) {
  const PacketIndex& nu = p.index();
  if (nu.j < 0)
    throw std::invalid_argument("packet_ft_interior_table: interior packets only");
  Vec2 w = xi - p.freq_center();
  // table is built for k = 1; rotate the argument back
  const auto& ctx = cache.ctx();
  long mk = arc_count(nu.j, ctx.j_max());
  double a = kTwoPi * double(nu.k - 1) / double(mk);
  Vec2 w1 = rotate(w, -a);
  // the modulation phase shift does not rotate; only the window does. The
  // window of sector k is the rotation of sector 1's window, so
  // h_hat_k(w) = h_hat_1(R_{-a} w).
  double need = std::max(w1.norm() * 1.05 + 1.0, rho_max_hint);
  const HatTable& tab = cache.hat_table(nu.j, need);
  return p.norm_constant() * std::ldexp(1.0, -nu.j) * tab.eval(w1);
}

// ---------------------------------------------------------------------------
// envelope fits

struct DecayFit {
  double C_fit = 0.0;
  double c_fit = 0.0;
  double r2 = 0.0;            // fit quality of log-envelope vs u^{1/s}
  double r2_alt = 0.0;        // competing exponent u^{1/(2s)}
  bool degenerate = false;    // dynamic range below 4 decades
  std::vector<double> u, env;
};

namespace detail {

inline void linfit(const std::vector<double>& x, const std::vector<double>& y,
                   double* slope, double* icept, double* r2) {
  std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  double d = n * sxx - sx * sx;
  *slope = (n * sxy - sx * sy) / d;
  *icept = (sy - *slope * sx) / n;
  double ssr = 0, sst = 0, ym = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = *icept + *slope * x[i];
    ssr += sqr(y[i] - pred);
    sst += sqr(y[i] - ym);
  }
  *r2 = sst > 0 ? 1.0 - ssr / sst : 0.0;
}

}  // namespace detail

// Least-squares fit of log(|psi_hat| / 2^j) against -c u^{1/s} on the radial
// envelope u = |2^j xi - c* m|, sampled along rays from the frequency center.
inline DecayFit fit_interior_decay(const WavePacket& p, const FourierCache& cache,
                                   double u_max = 50.0, int n_u = 120,
                                   int n_dir = 16) {
  const PacketIndex& nu = p.index();
  const FrameContext& ctx = cache.ctx();
  double s = ctx.s();
  DecayFit fit;
  double scale = std::ldexp(1.0, -nu.j);
  for (int iu = 1; iu <= n_u; ++iu) {
    double u = u_max * iu / n_u;
    double best = 0.0;
    for (int d = 0; d < n_dir; ++d) {
      double a = kTwoPi * d / n_dir;
      Vec2 xi = p.freq_center() + Vec2{u * scale * std::cos(a), u * scale * std::sin(a)};
      best = std::max(best,
                      std::abs(packet_ft_interior_table(p, xi, cache, u_max * scale + 2)));
    }
    if (best > 0) {
      fit.u.push_back(u);
      fit.env.push_back(best);
    }
  }
  if (fit.u.size() < 10) {
    fit.degenerate = true;
    return fit;
  }
  std::vector<double> xs, ys, xs_alt;
  for (std::size_t i = 0; i < fit.u.size(); ++i) {
    xs.push_back(std::pow(fit.u[i], 1.0 / s));
    xs_alt.push_back(std::pow(fit.u[i], 1.0 / (2 * s)));
    ys.push_back(std::log(fit.env[i] * scale));  // log(|psi_hat| / 2^j)
  }
  double slope, icept;
  detail::linfit(xs, ys, &slope, &icept, &fit.r2);
  fit.c_fit = -slope;
  fit.C_fit = std::exp(icept);
  double s2, i2;
  detail::linfit(xs_alt, ys, &s2, &i2, &fit.r2_alt);
  double dyn = *std::max_element(ys.begin(), ys.end()) -
               *std::min_element(ys.begin(), ys.end());
  fit.degenerate = dyn < 4.0 * std::log(10.0);
  return fit;
}

inline InteriorEnvelope FourierCache::interior_envelope(int j) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = env_int_.find(j);
    if (it != env_int_.end()) return it->second;
  }
  WavePacket probe({j, 1, {0, 0}}, *ctx_);
  double u_max = 60.0;
  auto fit = fit_interior_decay(probe, *this, u_max, 140, 12);
  InteriorEnvelope env;
  env.u_max = u_max;
  env.c_env = std::max(0.05, fit.c_fit * 0.95);
  // enforce domination of |h_hat| 2^{-2j} <= C_env exp(-c_env u^{1/s})
  double C = 0.0;
  double amp = std::ldexp(1.0, -probe.index().j);
  for (std::size_t i = 0; i < fit.u.size(); ++i) {
    double hnorm = fit.env[i] * amp / probe.norm_constant();  // |h_hat| 2^{-2j}
    C = std::max(C, hnorm * std::exp(env.c_env * std::pow(fit.u[i], 1.0 / ctx_->s())));
  }
  // near u = 0 the transform is bounded by its value at the center
  Vec2 v0 = probe.freq_center();
  double at0 = std::abs(packet_ft_interior_table(probe, v0, *this, 4.0)) * amp /
               probe.norm_constant();
  env.C_env = 1.25 * std::max(C, at0);
  std::lock_guard<std::mutex> lock(mu_);
  env_int_[j] = env;
  return env;
}

inline BoundaryEnvelope FourierCache::boundary_envelope() const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (env_bdry_) return *env_bdry_;
  }
  const FrameContext& ctx = *ctx_;
  double R = ctx.R();
  double s = ctx.s();
  int j = -1;
  // envelope of |psi_hat| / (R 2^{j/2}) against |m1|^{1/s} + |m2|^{1/s};
  // probe along both axes at a few xi samples
  std::vector<double> xs, ys;
  std::vector<Vec2> xis = {{0.3, 0.1}, {0.7, -0.4}, {0.05, 0.9}};
  double amp = R * std::pow(2.0, 0.5 * j);
  for (int axis = 0; axis < 2; ++axis) {
    for (long m = 0; m <= 28; m += 2) {
      double best = 0.0;
      PacketIndex nu{j, 1, {axis == 0 ? m : 3, axis == 0 ? 3 : m}};
      WavePacket p(nu, ctx);
      for (Vec2 xi : xis)
        best = std::max(best, std::abs(packet_ft_boundary_bessel(p, xi, *this).value));
      if (best > 1e-280) {
        xs.push_back(std::pow(double(m), 1.0 / s) + std::pow(3.0, 1.0 / s));
        ys.push_back(std::log(best / amp));
      }
    }
  }
  double slope, icept, r2;
  detail::linfit(xs, ys, &slope, &icept, &r2);
  BoundaryEnvelope env;
  env.c_env = std::max(0.05, -slope * 0.95);
  double C = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    C = std::max(C, std::exp(ys[i] + env.c_env * xs[i]));
  env.C_env = 1.25 * C;
  std::lock_guard<std::mutex> lock(mu_);
  env_bdry_ = env;
  return *env_bdry_;
}

// ---------------------------------------------------------------------------
// region energies

struct RegionEnergy {
  double E_in = 0.0;
  double E_out = 0.0;       // 1 - E_in by Plancherel (unit norm)
  double uncertainty = 0.0;
  bool from_envelope = false;  // certified envelope bound used instead of quadrature
};

namespace detail {

// quadrature nodes over a disk S in its own polar coordinates
struct DiskQuad {
  std::vector<Vec2> pts;
  std::vector<double> w;
};

inline DiskQuad disk_quadrature(const WellShapedDomain& S, int n_rad, int n_ang) {
  if (S.kind() != DomainKind::Disk)
    throw std::invalid_argument("disk_quadrature: disk domains only");
  DiskQuad q;
  auto rr = gauss_legendre(n_rad);
  double rs = S.disk_radius();
  Vec2 c = S.center();
  for (int i = 0; i < n_rad; ++i) {
    double rho = 0.5 * (rr.x[i] + 1.0) * rs;
    double wr = 0.5 * rs * rr.w[i];
    for (int l = 0; l < n_ang; ++l) {
      double a = kTwoPi * l / n_ang;
      q.pts.push_back({c.x + rho * std::cos(a), c.y + rho * std::sin(a)});
      q.w.push_back(wr * rho * kTwoPi / n_ang);
    }
  }
  return q;
}

}  // namespace detail

// E_in = int_S |psi_hat|^2, E_out = 1 - E_in. S must be contained in the unit
// frequency disk (the boundary transform bounds hold for |xi| <= 1). Interior
// packets whose envelope bound over S is already below `envelope_cutoff`
// return that bound directly as a certified value.
inline RegionEnergy energy_in_region(const WavePacket& p,
                                     const WellShapedDomain& S,
                                     const FourierCache& cache,
                                     double envelope_cutoff = 1e-7,
                                     int n_rad = 24, int n_ang = 48,
                                     bool doubling_check = false) {
  const FrameContext& ctx = cache.ctx();
  {
    auto [lo, hi] = S.bounding_box();
    double reach = std::max(std::hypot(lo.x, lo.y), std::hypot(hi.x, hi.y));
    if (reach > 1.0 + 1e-12)
      throw std::invalid_argument("energy_in_region: S must sit in the unit disk");
  }
  const PacketIndex& nu = p.index();
  RegionEnergy out;

  if (nu.j >= 0) {
    InteriorEnvelope env = cache.interior_envelope(nu.j);
    double d = S.distance_to_set(p.freq_center());
    double u = std::ldexp(1.0, nu.j) * d;
    double s = ctx.s();
    {
      // fitted on [0, u_max] and extrapolated beyond; the decay form is the
      // localization lemma's, only the rate constant is empirical
      double bound = sqr(p.norm_constant() * env.C_env) * std::ldexp(1.0, 2 * nu.j) *
                     S.area() * std::exp(-2.0 * env.c_env * std::pow(u, 1.0 / s));
      if (bound <= envelope_cutoff) {
        out.E_in = bound;
        out.E_out = 1.0 - bound;
        out.uncertainty = bound;
        out.from_envelope = true;
        return out;
      }
    }
    auto quad = detail::disk_quadrature(S, n_rad, n_ang);
    double rho_need = 0.0;
    for (auto& pt : quad.pts)
      rho_need = std::max(rho_need, (pt - p.freq_center()).norm());
    const HatTable& tab = cache.hat_table(nu.j, rho_need + 1.0);
    long mk = arc_count(nu.j, ctx.j_max());
    double rot = -kTwoPi * double(nu.k - 1) / double(mk);
    double amp = p.norm_constant() * std::ldexp(1.0, -nu.j);
    auto eval_sq = [&](Vec2 pt) {
      Vec2 w1 = rotate(pt - p.freq_center(), rot);
      return sqr(amp) * std::norm(tab.eval(w1));
    };
    NeumaierSum s_in;
    for (std::size_t i = 0; i < quad.pts.size(); ++i)
      s_in.add(quad.w[i] * eval_sq(quad.pts[i]));
    out.E_in = std::clamp(s_in.value(), 0.0, 1.0);
    out.uncertainty = 2e-3 * out.E_in + 1e-12;
    if (doubling_check) {
      auto q2 = detail::disk_quadrature(S, 2 * n_rad, 2 * n_ang);
      NeumaierSum s2;
      for (std::size_t i = 0; i < q2.pts.size(); ++i)
        s2.add(q2.w[i] * eval_sq(q2.pts[i]));
      out.uncertainty = std::abs(s2.value() - s_in.value());
      out.E_in = std::clamp(s2.value(), 0.0, 1.0);
    }
    out.E_out = std::clamp(1.0 - out.E_in, 0.0, 1.0);
    return out;
  }

  auto quad = detail::disk_quadrature(S, n_rad, n_ang);
  NeumaierSum s_in;
  for (std::size_t i = 0; i < quad.pts.size(); ++i) {
    auto r = packet_ft_boundary_bessel(p, quad.pts[i], cache);
    s_in.add(quad.w[i] * std::norm(r.value));
  }
  out.E_in = std::clamp(s_in.value(), 0.0, 1.0);
  out.uncertainty = 2e-3 * out.E_in + 1e-12;
  if (doubling_check) {
    auto q2 = detail::disk_quadrature(S, 2 * n_rad, 2 * n_ang);
    NeumaierSum s2;
    for (std::size_t i = 0; i < q2.pts.size(); ++i) {
      auto r = packet_ft_boundary_bessel(p, q2.pts[i], cache);
      s2.add(q2.w[i] * std::norm(r.value));
    }
    out.uncertainty = std::abs(s2.value() - s_in.value());
    out.E_in = std::clamp(s2.value(), 0.0, 1.0);
  }
  out.E_out = std::clamp(1.0 - out.E_in, 0.0, 1.0);
  return out;
}

}  // namespace sslo

#endif  // SSLO_FOURIER_HPP
