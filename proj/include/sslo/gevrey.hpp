#ifndef SSLO_GEVREY_HPP
#define SSLO_GEVREY_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sslo/fft.hpp"
#include "sslo/util.hpp"

namespace sslo {

enum class MotherVariant { Radial, Angular };

// Gevrey-s bump template. Flanks use the standard smooth transition
// h(x) = f(x)/(f(x)+f(1-x)) with f(x) = exp(-x^{-1/(s-1)}), which is
// Gevrey-s for s > 1. Radial variant: support [0.45, 1.1], plateau [0.5, 1].
// Angular variant: support [-0.55, 0.55], plateau [-0.5, 0.5].
class GevreyMother {
 public:
  GevreyMother(double s, MotherVariant variant) : s_(s), variant_(variant) {
    if (s <= 1.0) throw std::invalid_argument("GevreyMother: s must be > 1");
  }

  double s() const { return s_; }
  MotherVariant variant() const { return variant_; }

  double support_lo() const { return variant_ == MotherVariant::Radial ? 0.45 : -0.55; }
  double support_hi() const { return variant_ == MotherVariant::Radial ? 1.10 : 0.55; }
  double plateau_lo() const { return variant_ == MotherVariant::Radial ? 0.50 : -0.50; }
  double plateau_hi() const { return variant_ == MotherVariant::Radial ? 1.00 : 0.50; }

  double operator()(double x) const {
    if (x <= support_lo() || x >= support_hi()) return 0.0;
    if (x >= plateau_lo() && x <= plateau_hi()) return 1.0;
    if (x < plateau_lo())
      return transition((x - support_lo()) / (plateau_lo() - support_lo()));
    return transition((support_hi() - x) / (support_hi() - plateau_hi()));
  }

  // h(0)=0, h(1)=1, C^inf monotone
  double transition(double t) const {
    double ft = flank(t);
    double f1 = flank(1.0 - t);
    double denom = ft + f1;
    if (denom == 0.0) return t > 0.5 ? 1.0 : 0.0;
    return ft / denom;
  }

 private:
  double flank(double t) const {
    if (t <= 0.0) return 0.0;
    double e = std::pow(t, -1.0 / (s_ - 1.0));
    return e > 700.0 ? 0.0 : std::exp(-e);
  }

  double s_;
  MotherVariant variant_;
};

// Radial family phi_j, j <= j_max, R = 2^{j_max}.
// (R1) sum of squares = 1 on [0, R); (R2) supp(phi_j) in
// I_j = [R - 1.1 2^j, R - 0.9 2^{j-1}] cap [0, R]; at most two scales active.
class RadialCutoffFamily {
 public:
  RadialCutoffFamily(int j_max, double s)
      : j_max_(j_max), R_(std::ldexp(1.0, j_max)), s_(s),
        mother_(s, MotherVariant::Radial) {
    if (j_max < 1) throw std::invalid_argument("RadialCutoffFamily: j_max >= 1");
  }

  int j_max() const { return j_max_; }
  double R() const { return R_; }
  double s() const { return s_; }
  const GevreyMother& mother() const { return mother_; }

  // support interval of phi_j (clipped at 0)
  std::pair<double, double> support(int j) const {
    double lo = R_ - 1.1 * std::ldexp(1.0, j);
    double hi = R_ - 0.45 * std::ldexp(1.0, j);
    return {std::max(0.0, lo), std::max(0.0, hi)};
  }

  double phi_tilde(int j, double r) const {
    if (j > j_max_) return 0.0;
    return mother_((R_ - r) / std::ldexp(1.0, j));
  }

  // normalized cutoff; rejects r outside [0, R)
  double phi(int j, double r) const {
    if (r < 0.0 || r >= R_)
      throw std::domain_error("phi: r must lie in [0, R)");
    return phi_unchecked(j, r);
  }

  // packets evaluate through this; r >= R maps to 0 by convention
  double phi_unchecked(int j, double r) const {
    if (r < 0.0 || r >= R_) return 0.0;
    double pj = phi_tilde(j, r);
    if (pj == 0.0) return 0.0;
    return pj / std::sqrt(weight(r));
  }

  // W(r) = sum of squared raw cutoffs; only scales around log2(R - r) are live
  double weight(double r) const {
    double gap = R_ - r;
    int jc = static_cast<int>(std::ceil(std::log2(gap)));
    double w = 0.0;
    for (int j = jc - 1; j <= jc + 1; ++j) {
      if (j > j_max_) continue;
      w += sqr(phi_tilde(j, r));
    }
    return w;
  }

  std::vector<int> active_scales(double r) const {
    std::vector<int> js;
    double gap = R_ - r;
    int jc = static_cast<int>(std::ceil(std::log2(gap)));
    for (int j = jc - 1; j <= jc + 1; ++j)
      if (j <= j_max_ && phi_tilde(j, r) != 0.0) js.push_back(j);
    return js;
  }

 private:
  int j_max_;
  double R_;
  double s_;
  GevreyMother mother_;
};

// Angular family eta_{j,k}, k = 1..m, on S^1. Rotation symmetric by
// construction: eta_k(theta) = eta_1(theta - 2pi(k-1)/m) modulo 2pi.
class AngularCutoffFamily {
 public:
  AngularCutoffFamily(int arc_count, double s)
      : m_(arc_count), s_(s), mother_(s, MotherVariant::Angular) {
    if (arc_count < 1) throw std::invalid_argument("AngularCutoffFamily: m >= 1");
    delta_ = kTwoPi / m_;
  }

  int arc_count() const { return m_; }
  double s() const { return s_; }
  double arc_width() const { return delta_; }
  double arc_center(int k) const { return (k - 0.5) * delta_; }

  // nominal arc [2pi(k-1)/m, 2pi k/m)
  std::pair<double, double> arc(int k) const {
    return {(k - 1) * delta_, k * delta_};
  }
  // 5%-inflated arc Theta*_{j,k}
  std::pair<double, double> arc_star(int k) const {
    return {(k - 1) * delta_ - 0.05 * delta_, k * delta_ + 0.05 * delta_};
  }

  double eta_tilde(int k, double theta) const {
    if (m_ == 1) return 1.0;
    double d = wrap_pm_pi(theta - arc_center(k));
    return mother_(d / delta_);
  }

  double eta(int k, double theta) const {
    if (k < 1 || k > m_) throw std::domain_error("eta: k out of range");
    if (m_ == 1) return 1.0;
    double ek = eta_tilde(k, theta);
    if (ek == 0.0) return 0.0;
    return ek / std::sqrt(weight(theta));
  }

  double weight(double theta) const {
    // only the arc containing theta and its two neighbours can be live;
    // for m <= 3 the neighbour indices collide modulo m, so dedupe
    int kc = static_cast<int>(std::floor(theta / delta_));
    double w = 0.0;
    int seen[3] = {-1, -1, -1};
    int nseen = 0;
    for (int dk = -1; dk <= 1; ++dk) {
      int k0 = ((kc + dk) % m_ + m_) % m_;
      bool dup = false;
      for (int i = 0; i < nseen; ++i) dup = dup || seen[i] == k0;
      if (dup) continue;
      seen[nseen++] = k0;
      w += sqr(eta_tilde(k0 + 1, theta));
    }
    return w;
  }

  bool in_arc_star(int k, double theta) const {
    if (m_ == 1) return true;
    double d = wrap_pm_pi(theta - arc_center(k));
    return std::abs(d) <= 0.55 * delta_;
  }

 private:
  int m_;
  double s_;
  double delta_;
  GevreyMother mother_;
};

struct DerivativeBoundFit {
  double C1 = 0.0;
  double C2 = 0.0;
  std::vector<double> sup_norms;  // measured sup |d^k f| for k = 0..order
  bool fit_ok = false;
  bool grid_ok = true;  // false when Richardson residual exceeds 1e-4 relative
};

namespace detail {

// Richardson-extrapolated central differences of callable f at x, order k <= 4
inline double central_diff(const std::function<double(double)>& f, double x,
                           int k, double h, double* residual) {
  auto stencil = [&](double hh) {
    switch (k) {
      case 0: return f(x);
      case 1: return (f(x + hh) - f(x - hh)) / (2 * hh);
      case 2: return (f(x + hh) - 2 * f(x) + f(x - hh)) / (hh * hh);
      case 3:
        return (f(x + 2 * hh) - 2 * f(x + hh) + 2 * f(x - hh) - f(x - 2 * hh)) /
               (2 * hh * hh * hh);
      default:
        return (f(x + 2 * hh) - 4 * f(x + hh) + 6 * f(x) - 4 * f(x - hh) +
                f(x - 2 * hh)) / (hh * hh * hh * hh);
    }
  };
  double d1 = stencil(h);
  double d2 = stencil(h / 2);
  double extrap = (4.0 * d2 - d1) / 3.0;  // O(h^2) stencils
  if (residual) *residual = std::abs(extrap - d2);
  return extrap;
}

// smallest (C1, C2) with M_k <= C1 C2^k (k!)^s scale^k for all measured k.
// Convention: C1 = max(M_0, 1); C2 minimal given C1.
inline DerivativeBoundFit fit_constants(const std::vector<double>& M, double s,
                                        double scale) {
  DerivativeBoundFit fit;
  fit.sup_norms = M;
  fit.C1 = std::max(M[0], 1.0);
  double c2 = 0.0;
  for (std::size_t k = 1; k < M.size(); ++k) {
    double need = M[k] / (fit.C1 * std::pow(std::tgamma(k + 1.0), s) *
                          std::pow(scale, double(k)));
    if (need > 0) c2 = std::max(c2, std::pow(need, 1.0 / double(k)));
  }
  fit.C2 = std::max(c2, 1e-12);
  fit.fit_ok = fit.C2 <= 1e6;
  return fit;
}

}  // namespace detail

// (R3): sup |d^k_r phi_j| <= C1 C2^k (k!)^s 2^{-jk}
inline DerivativeBoundFit check_derivative_bounds(const RadialCutoffFamily& fam,
                                                  int j, int max_order = 4,
                                                  int grid = 2000) {
  if (max_order > 4)
    throw std::invalid_argument("check_derivative_bounds: max_order <= 4");
  auto [lo, hi] = fam.support(j);
  double pad = 0.02 * (hi - lo);
  auto f = [&](double r) { return fam.phi_unchecked(j, r); };
  std::vector<double> M(max_order + 1, 0.0);
  bool grid_ok = true;
  double h0 = (hi - lo) / (40.0 * grid);
  for (int i = 0; i <= grid; ++i) {
    double r = lo + pad + (hi - lo - 2 * pad) * i / grid;
    if (r <= 0 || r >= fam.R()) continue;
    for (int k = 0; k <= max_order; ++k) {
      double res = 0.0;
      double d = std::abs(detail::central_diff(f, r, k, h0 * (1 << k), &res));
      if (d > 1e-8 && res > 1e-4 * d && k <= 2) grid_ok = false;
      M[k] = std::max(M[k], d);
    }
  }
  auto fit = detail::fit_constants(M, fam.s(), std::ldexp(1.0, -j));
  fit.grid_ok = grid_ok;
  return fit;
}

// (A3): sup |d^k_theta eta_{j,k}| <= C1 C2^k (k!)^s m(j)^k
inline DerivativeBoundFit check_derivative_bounds(const AngularCutoffFamily& fam,
                                                  int k_arc = 1, int max_order = 4,
                                                  int grid = 2000) {
  if (max_order > 4)
    throw std::invalid_argument("check_derivative_bounds: max_order <= 4");
  auto [lo, hi] = fam.arc_star(k_arc);
  auto f = [&](double t) { return fam.eta(k_arc, t); };
  std::vector<double> M(max_order + 1, 0.0);
  bool grid_ok = true;
  double h0 = (hi - lo) / (40.0 * grid);
  for (int i = 0; i <= grid; ++i) {
    double t = lo + (hi - lo) * i / grid;
    for (int k = 0; k <= max_order; ++k) {
      double res = 0.0;
      double d = std::abs(detail::central_diff(f, t, k, h0 * (1 << k), &res));
      if (d > 1e-8 && res > 1e-4 * d && k <= 2) grid_ok = false;
      M[k] = std::max(M[k], d);
    }
  }
  auto fit = detail::fit_constants(M, fam.s(), fam.arc_count());
  fit.grid_ok = grid_ok;
  return fit;
}

// Worst-case ratio of inf_l (l!)^s X^{-l} against e^{1/2} exp(-X^{1/s}/(2e)),
// evaluated in log space. The inequality holds iff the result is <= 1.
inline double check_tech_inequality(double s, const std::vector<double>& X_grid) {
  double worst = 0.0;
  for (double X : X_grid) {
    if (X <= 0) throw std::invalid_argument("check_tech_inequality: X > 0");
    double lnX = std::log(X);
    double best = std::numeric_limits<double>::infinity();
    for (int l = 0; l <= 200; ++l) {
      double v = s * std::lgamma(l + 1.0) - l * lnX;
      best = std::min(best, v);
    }
    double rhs = 0.5 - std::pow(X, 1.0 / s) / (2.0 * std::exp(1.0));
    worst = std::max(worst, std::exp(best - rhs));
  }
  return worst;
}

struct FourierDecayFit {
  double C_fit = 0.0;
  double c_fit = 0.0;
  bool pass = false;           // c_fit > 0 and lemma envelope dominates
  bool aliasing = false;       // window mass near the sampling boundary
  double A_used = 0.0, B_used = 0.0;
  std::vector<double> envelope_xi, envelope_val;
};

// Fourier decay of a sampled 1D Gevrey window (Lemma A.2 shape, d = 1).
// samples: uniform over [x0, x0 + L) with the support strictly inside.
// For the check, B may be inflated by powers of 2 until the stated bound
// C = e^{1/2}, c = 1/(2e) dominates the measured envelope; the used pair
// is reported.
inline FourierDecayFit fourier_decay_check(const std::vector<double>& samples,
                                           double x0, double L, double s,
                                           double support_measure, double A,
                                           double B, bool periodic = false) {
  (void)x0;
  std::size_t n = samples.size();
  if (n < (1u << 12))
    throw std::invalid_argument("fourier_decay_check: need >= 2^12 samples");
  FourierDecayFit out;
  // boundary-mass aliasing guard (skip for periodic windows)
  if (!periodic) {
    std::size_t edge = n / 64;
    double edge_mass = 0.0;
    for (std::size_t i = 0; i < edge; ++i)
      edge_mass += std::abs(samples[i]) + std::abs(samples[n - 1 - i]);
    out.aliasing = edge_mass > 1e-12;
  }

  std::vector<std::complex<double>> buf(samples.begin(), samples.end());
  fft_1d(buf.data(), static_cast<int>(n), FFTW_FORWARD);
  double dx = L / n;
  // 1D convention: w_hat(omega) = (2pi)^{-1/2} int w e^{-i x omega} dx.
  // Periodic windows use plain Fourier coefficients instead.
  double scale = periodic ? 1.0 / double(n) : dx / std::sqrt(kTwoPi);

  std::vector<double> mag(n / 2), freq(n / 2);
  for (std::size_t i = 0; i < n / 2; ++i) {
    mag[i] = std::abs(buf[i]) * scale;
    freq[i] = periodic ? double(i) : kTwoPi * double(i) / L;
  }
  // envelope = local maxima of |w_hat|
  for (std::size_t i = 1; i + 1 < n / 2; ++i) {
    if (mag[i] >= mag[i - 1] && mag[i] >= mag[i + 1] && mag[i] > 1e-16 * mag[0]) {
      out.envelope_xi.push_back(freq[i]);
      out.envelope_val.push_back(mag[i]);
    }
  }
  if (out.envelope_xi.size() < 8) {
    out.pass = false;
    return out;
  }
  // least squares: log|w| = log C - c (xi/B)^{1/s}
  double su = 0, sv = 0, suu = 0, suv = 0;
  std::size_t m = out.envelope_xi.size();
  for (std::size_t i = 0; i < m; ++i) {
    double u = std::pow(out.envelope_xi[i] / B, 1.0 / s);
    double v = std::log(out.envelope_val[i]);
    su += u; sv += v; suu += u * u; suv += u * v;
  }
  double denom = m * suu - su * su;
  double slope = (m * suv - su * sv) / denom;
  double icept = (sv - slope * su) / m;
  out.c_fit = -slope;
  out.C_fit = std::exp(icept);

  // Lemma bound domination with C = e^{1/2}, c = 1/(2e); inflate B if needed
  double Buse = B;
  bool dominated = false;
  for (int tries = 0; tries < 24 && !dominated; ++tries) {
    dominated = true;
    for (std::size_t i = 0; i < m; ++i) {
      double bound = std::exp(0.5) * A * support_measure *
                     std::exp(-std::pow(out.envelope_xi[i] / Buse, 1.0 / s) /
                              (2.0 * std::exp(1.0)));
      if (out.envelope_val[i] > bound) { dominated = false; break; }
    }
    if (!dominated) Buse *= 2.0;
  }
  out.A_used = A;
  out.B_used = Buse;
  out.pass = out.c_fit > 0 && dominated && !out.aliasing;
  return out;
}

}  // namespace sslo

#endif  // SSLO_GEVREY_HPP
