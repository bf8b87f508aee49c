#ifndef SSLO_SECTORIZATION_HPP
#define SSLO_SECTORIZATION_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sslo/util.hpp"

namespace sslo {

struct PacketIndex {
  int j = 0;
  int k = 1;
  std::array<long, 2> m{0, 0};

  bool operator==(const PacketIndex&) const = default;
};

enum class PacketClass { Interior, Boundary };

inline PacketClass classify(const PacketIndex& nu) {
  return nu.j >= 0 ? PacketClass::Interior : PacketClass::Boundary;
}

// m(j) = 2^{j_max - j} for 0 <= j <= j_max, 2^{j_max} for j < 0
inline long arc_count(int j, int j_max) {
  if (j > j_max) throw std::invalid_argument("arc_count: j > j_max");
  return j >= 0 ? (1L << (j_max - j)) : (1L << j_max);
}

// Radial-angular sector S_{j,k} and its enlargement S*_{j,k}.
struct Sector {
  int j = 0;
  int k = 1;
  double R = 2.0;
  int j_max = 1;

  // nominal band [R - 2^j, R - 2^{j-1}], clipped to [0, R]
  double r_lo() const { return std::max(0.0, R - std::ldexp(1.0, j)); }
  double r_hi() const { return std::max(0.0, R - std::ldexp(1.0, j - 1)); }
  // enlarged band I_j = [R - 1.1 2^j, R - 0.45 2^j], clipped
  double r_star_lo() const { return std::max(0.0, R - 1.1 * std::ldexp(1.0, j)); }
  double r_star_hi() const { return std::max(0.0, R - 0.45 * std::ldexp(1.0, j)); }

  long arcs() const { return arc_count(j, j_max); }
  double arc_width() const { return kTwoPi / double(arcs()); }
  double theta_lo() const { return (k - 1) * arc_width(); }
  double theta_hi() const { return k * arc_width(); }
  double theta_star_lo() const { return theta_lo() - 0.05 * arc_width(); }
  double theta_star_hi() const { return theta_hi() + 0.05 * arc_width(); }

  bool contains(Vec2 x) const {
    double r = x.norm();
    if (r < r_lo() || r > r_hi()) return false;
    double d = wrap_pm_pi(arg_2pi(x) - 0.5 * (theta_lo() + theta_hi()));
    return std::abs(d) <= 0.5 * arc_width();
  }

  bool contains_star(Vec2 x) const {
    double r = x.norm();
    if (r < r_star_lo() || r > r_star_hi()) return false;
    if (arcs() == 1) return true;
    double d = wrap_pm_pi(arg_2pi(x) - 0.5 * (theta_lo() + theta_hi()));
    return std::abs(d) <= 0.55 * arc_width();
  }
};

// All (j, k, m) with j_min <= j <= j_max, |m_i| <= m_box. Boundary ladder is
// truncated at j_min; the caller accounts for the analytic tail.
inline std::vector<PacketIndex> build_index_set(double R, int j_min, long m_box) {
  int j_max = 0;
  if (!dyadic_exponent(R, &j_max) || j_max < 1)
    throw std::invalid_argument("build_index_set: R must be dyadic >= 2");
  if (j_min >= 0) throw std::invalid_argument("build_index_set: j_min < 0");
  if (m_box < 0) throw std::invalid_argument("build_index_set: m_box >= 0");
  std::vector<PacketIndex> out;
  for (int j = j_max; j >= j_min; --j) {
    long mk = arc_count(j, j_max);
    for (long k = 1; k <= mk; ++k)
      for (long m1 = -m_box; m1 <= m_box; ++m1)
        for (long m2 = -m_box; m2 <= m_box; ++m2)
          out.push_back({j, int(k), {m1, m2}});
  }
  return out;
}

namespace detail {

// exact extremes of r cos(theta) over r in [r0, r1], theta in [a, b]
inline std::pair<double, double> rcos_range(double r0, double r1, double a,
                                            double b) {
  double cmax, cmin;
  if (b - a >= kTwoPi) {
    cmax = 1.0;
    cmin = -1.0;
  } else {
    // does [a, b] contain a multiple of 2pi? compare on the wrapped line
    double a0 = a - kTwoPi * std::floor(a / kTwoPi);  // in [0, 2pi)
    double b0 = a0 + (b - a);
    cmax = (a0 == 0.0 || b0 >= kTwoPi) ? 1.0 : std::max(std::cos(a), std::cos(b));
    cmin = (a0 <= kPi && b0 >= kPi) || (b0 >= 3 * kPi)
               ? -1.0
               : std::min(std::cos(a), std::cos(b));
  }
  double hi = cmax >= 0 ? r1 * cmax : r0 * cmax;
  double lo = cmin <= 0 ? r1 * cmin : r0 * cmin;
  return {lo, hi};
}

}  // namespace detail

// Exact side of the smallest axis-aligned square containing S*_{j,k}.
inline double sector_bounding_side(const Sector& sec) {
  double r0 = sec.r_star_lo(), r1 = sec.r_star_hi();
  double a = sec.theta_star_lo(), b = sec.theta_star_hi();
  auto [x_lo, x_hi] = detail::rcos_range(r0, r1, a, b);
  // y extremes via cos shift: sin t = cos(t - pi/2)
  auto [y_lo, y_hi] = detail::rcos_range(r0, r1, a - kPi / 2, b - kPi / 2);
  return std::max(x_hi - x_lo, y_hi - y_lo);
}

// Universal bounding-square constant: the supremum of side / 2^j over all
// interior sectors at every dyadic scale. Attained in the thin-arc limit,
// where the enlarged sector approaches a slab of arc length 2.2 pi 2^j and
// depth 0.65 2^j at the worst axis tilt.
inline double c_star_square_universal() {
  return std::hypot(2.2 * kPi, 0.65);
}

// Frame lattice constant of the packet construction, c* = 2pi / C*.
inline double frame_c_star() { return kTwoPi / c_star_square_universal(); }

struct CStarReport {
  double ladder_max = 0.0;      // max over interior sectors of this R
  double universal = 0.0;       // sup over all scales (used by packets)
  double c_star = 0.0;          // 2pi / universal
  std::vector<double> per_scale;  // max_k side/2^j for j = 0..j_max
};

inline CStarReport bounding_square_constant(double R) {
  int j_max = 0;
  if (!dyadic_exponent(R, &j_max) || j_max < 1)
    throw std::invalid_argument("bounding_square_constant: R must be dyadic >= 2");
  CStarReport rep;
  rep.universal = c_star_square_universal();
  rep.c_star = frame_c_star();
  for (int j = 0; j <= j_max; ++j) {
    long mk = arc_count(j, j_max);
    double worst = 0.0;
    for (long k = 1; k <= mk; ++k) {
      Sector sec{j, int(k), R, j_max};
      worst = std::max(worst, sector_bounding_side(sec) / std::ldexp(1.0, j));
    }
    rep.per_scale.push_back(worst);
    rep.ladder_max = std::max(rep.ladder_max, worst);
  }
  return rep;
}

}  // namespace sslo

#endif  // SSLO_SECTORIZATION_HPP
