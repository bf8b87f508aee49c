#ifndef SSLO_QUADRATURE_HPP
#define SSLO_QUADRATURE_HPP

#include <map>
#include <mutex>
#include <vector>

#include "sslo/util.hpp"

namespace sslo {

struct GLRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Gauss-Legendre nodes by Newton iteration on P_n, seeded with the Chebyshev
// angle approximation. Rules are cached; packets are smooth so node counts
// stay modest.
inline const GLRule& gauss_legendre(int n) {
  static std::map<int, GLRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GLRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.w[i] = w;
    rule.w[n - 1 - i] = w;
  }
  auto [pos, ok] = cache.emplace(n, std::move(rule));
  (void)ok;
  return pos->second;
}

struct ScaledRule {
  std::vector<double> x;
  std::vector<double> w;
};

inline ScaledRule gl_on(double a, double b, int n) {
  const GLRule& r = gauss_legendre(n);
  ScaledRule out;
  out.x.resize(n);
  out.w.resize(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    out.x[i] = mid + half * r.x[i];
    out.w[i] = half * r.w[i];
  }
  return out;
}

}  // namespace sslo

#endif  // SSLO_QUADRATURE_HPP
