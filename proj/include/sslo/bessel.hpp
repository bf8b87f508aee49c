#ifndef SSLO_BESSEL_HPP
#define SSLO_BESSEL_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sslo/util.hpp"

namespace sslo {
namespace bessel {

// J_n via power series for |t| <= 12, Miller backward recurrence with the
// J_0 + 2 sum J_{2k} = 1 normalization otherwise. J_{-n} = (-1)^n J_n and
// J_n(-t) = (-1)^n J_n(t) reduce everything to n >= 0, t >= 0.
//
// The recurrence must start above the turning point, so the start index is
// max(n, ceil(t)) + ceil(10 + 2 sqrt(n + t)).

inline constexpr int kMaxOrder = 10000;
inline constexpr double kMaxArg = 1e6;
inline constexpr double kSeriesCut = 12.0;

namespace detail {

inline double series_jn(int n, double t) {
  // first term (t/2)^n / n! in log space to dodge intermediate under/overflow
  double lt = std::log(t / 2.0);
  double lead = n * lt - std::lgamma(n + 1.0);
  if (lead < -745.0) return 0.0;
  double term = std::exp(lead);
  double sum = term;
  double q = t * t / 4.0;
  for (int k = 1; k <= 80; ++k) {
    term *= -q / (double(k) * double(n + k));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
  }
  return sum;
}

// one backward pass producing J_0..J_nmax(t); t > 0
inline std::vector<double> miller_array(int n_max, double t) {
  int start = std::max(n_max, static_cast<int>(std::ceil(t))) +
              static_cast<int>(std::ceil(10.0 + 2.0 * std::sqrt(n_max + t)));
  if (start % 2) ++start;
  std::vector<double> out(n_max + 1, 0.0);
  double jp = 0.0;          // J~_{k+1}
  double jc = 1e-30;        // J~_k seed
  double norm = 0.0;        // J_0 + 2 sum_{even k >= 2} J_k
  for (int k = start; k >= 1; --k) {
    double jm = (2.0 * k / t) * jc - jp;
    jp = jc;
    jc = jm;
    if (k - 1 <= n_max) out[k - 1] = jc;
    if ((k - 1) % 2 == 0 && (k - 1) >= 2) norm += 2.0 * jc;
    if (std::abs(jc) > 1e280) {
      jc *= 1e-280;
      jp *= 1e-280;
      norm *= 1e-280;
      for (auto& v : out) v *= 1e-280;
    }
  }
  norm += jc;  // J~_0
  for (auto& v : out) v /= norm;
  return out;
}

}  // namespace detail

struct EvalResult {
  double value = 0.0;
  bool underflow_certified = false;  // envelope certifies |J_n(t)| < 1e-300
};

// envelope (e^2 |t| / (2|n|))^{|n|}, valid for |t| < |n|
inline double small_argument_envelope_log(int n, double t) {
  double an = std::abs(double(n));
  return an * (std::log(std::exp(2.0) * std::abs(t)) - std::log(2.0 * an));
}

inline EvalResult j_n_checked(int n, double t) {
  if (std::abs(n) > kMaxOrder || std::abs(t) > kMaxArg)
    throw std::invalid_argument("bessel: |n| <= 1e4 and |t| <= 1e6 required");
  double sign = 1.0;
  if (n < 0) {
    n = -n;
    if (n % 2) sign = -sign;
  }
  if (t < 0) {
    t = -t;
    if (n % 2) sign = -sign;
  }
  if (t == 0.0) return {n == 0 ? 1.0 : 0.0, false};
  if (n > t && small_argument_envelope_log(n, t) < -691.0) {
    // (e^2 t / 2n)^n < 1e-300
    return {0.0, true};
  }
  if (t <= kSeriesCut) return {sign * detail::series_jn(n, t), false};
  auto arr = detail::miller_array(n, t);
  return {sign * arr[n], false};
}

inline double j_n(int n, double t) { return j_n_checked(n, t).value; }

// J_0..J_{n_max}(t) in one pass; t may be any sign handling is caller's
// business (always called with t >= 0 here).
inline std::vector<double> j_array(int n_max, double t) {
  if (n_max < 0) throw std::invalid_argument("j_array: n_max >= 0");
  if (t < 0) throw std::invalid_argument("j_array: t >= 0");
  if (t == 0.0) {
    std::vector<double> out(n_max + 1, 0.0);
    out[0] = 1.0;
    return out;
  }
  if (t <= kSeriesCut && n_max <= 64) {
    std::vector<double> out(n_max + 1);
    for (int n = 0; n <= n_max; ++n) out[n] = detail::series_jn(n, t);
    return out;
  }
  return detail::miller_array(n_max, t);
}

}  // namespace bessel
}  // namespace sslo

#endif  // SSLO_BESSEL_HPP
