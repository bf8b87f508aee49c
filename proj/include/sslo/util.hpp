#ifndef SSLO_UTIL_HPP
#define SSLO_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sslo {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double sqr(double x) { return x * x; }

// log base 2 (the convention used throughout for budget formulas)
inline double log2d(double x) { return std::log2(x); }

// Neumaier compensated summation. Reductions that must be bit-stable across
// thread counts accumulate per-item values first and feed them to this in a
// fixed order.
class NeumaierSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double neumaier_total(const std::vector<double>& xs) {
  NeumaierSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One RNG stream per (seed, stream index); trial-level reproducibility does
// not depend on scheduling.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

inline unsigned thread_count() {
  if (const char* env = std::getenv("SSLO_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Chunked parallel map. fn(i) must write only to its own slot; callers sum
// results sequentially afterwards so totals do not depend on the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  unsigned nt = thread_count();
  if (nt <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + nt - 1) / nt;
  for (unsigned t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
};

inline Vec2 rotate(Vec2 v, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// angle in [0, 2pi)
inline double arg_2pi(Vec2 v) {
  double a = std::atan2(v.y, v.x);
  if (a < 0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

// wrap to [-pi, pi)
inline double wrap_pm_pi(double t) {
  t = std::fmod(t + kPi, kTwoPi);
  if (t < 0) t += kTwoPi;
  return t - kPi;
}

inline bool is_pow2(long n) { return n > 0 && (n & (n - 1)) == 0; }

// exact dyadic check: R = 2^j for integer j >= 0
inline bool dyadic_exponent(double R, int* j_out) {
  if (R < 1.0 || R != std::floor(R)) return false;
  long n = static_cast<long>(R);
  if (!is_pow2(n)) return false;
  int j = 0;
  while ((1L << j) < n) ++j;
  if (j_out) *j_out = j;
  return true;
}

}  // namespace sslo

#endif  // SSLO_UTIL_HPP
