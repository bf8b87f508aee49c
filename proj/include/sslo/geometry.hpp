#ifndef SSLO_GEOMETRY_HPP
#define SSLO_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sslo/quadrature.hpp"
#include "sslo/util.hpp"

namespace sslo {

enum class DomainKind { Disk, Ellipse, Polygon };

struct NeighborhoodArea {
  double area = 0.0;
  double std_error = 0.0;  // zero for the analytic disk shortcut
  bool analytic = false;
};

struct LatticeCount {
  long count = 0;
  double lemma_bound = 0.0;  // 4 C max{t^2, t H^1(dS)}, valid for t >= sqrt(2)/2
};

// Frequency-side region S with boundary-distance and membership queries.
// Boundary membership resolves as "inside" (closed-region semantics).
class WellShapedDomain {
 public:
  static WellShapedDomain disk(Vec2 center, double radius,
                               std::optional<double> ws_constant = {}) {
    if (radius <= 0) throw std::invalid_argument("disk: radius must be positive");
    WellShapedDomain d;
    d.kind_ = DomainKind::Disk;
    d.center_ = center;
    d.radius_ = radius;
    d.boundary_length_ = kTwoPi * radius;
    d.ws_constant_ = ws_constant.value_or(kDefaultDiskWs);
    return d;
  }

  static WellShapedDomain ellipse(Vec2 center, Vec2 semi_axes,
                                  std::optional<double> ws_constant = {}) {
    if (semi_axes.x <= 0 || semi_axes.y <= 0)
      throw std::invalid_argument("ellipse: semi-axes must be positive");
    WellShapedDomain d;
    d.kind_ = DomainKind::Ellipse;
    d.center_ = center;
    d.axes_ = semi_axes;
    d.boundary_length_ = ellipse_perimeter(semi_axes.x, semi_axes.y);
    d.ws_constant_ = ws_constant.value_or(kDefaultConvexWs);
    return d;
  }

  // vertices counterclockwise, convex
  static WellShapedDomain polygon(std::vector<Vec2> vertices,
                                  std::optional<double> ws_constant = {}) {
    if (vertices.size() < 3) throw std::invalid_argument("polygon: need >= 3 vertices");
    WellShapedDomain d;
    d.kind_ = DomainKind::Polygon;
    d.verts_ = std::move(vertices);
    double per = 0.0;
    for (std::size_t i = 0; i < d.verts_.size(); ++i) {
      Vec2 a = d.verts_[i], b = d.verts_[(i + 1) % d.verts_.size()];
      per += (b - a).norm();
    }
    d.boundary_length_ = per;
    d.ws_constant_ = ws_constant.value_or(kDefaultConvexWs);
    return d;
  }

  DomainKind kind() const { return kind_; }
  Vec2 center() const { return center_; }
  double disk_radius() const { return radius_; }
  Vec2 semi_axes() const { return axes_; }
  const std::vector<Vec2>& vertices() const { return verts_; }
  double boundary_length() const { return boundary_length_; }
  double ws_constant() const { return ws_constant_; }
  void set_ws_constant(double c) { ws_constant_ = c; }

  double area() const {
    switch (kind_) {
      case DomainKind::Disk: return kPi * radius_ * radius_;
      case DomainKind::Ellipse: return kPi * axes_.x * axes_.y;
      case DomainKind::Polygon: {
        double a = 0.0;
        for (std::size_t i = 0; i < verts_.size(); ++i) {
          Vec2 p = verts_[i], q = verts_[(i + 1) % verts_.size()];
          a += p.x * q.y - q.x * p.y;
        }
        return 0.5 * a;
      }
    }
    return 0.0;
  }

  double diameter() const {
    switch (kind_) {
      case DomainKind::Disk: return 2.0 * radius_;
      case DomainKind::Ellipse: return 2.0 * std::max(axes_.x, axes_.y);
      case DomainKind::Polygon: {
        double d = 0.0;
        for (std::size_t i = 0; i < verts_.size(); ++i)
          for (std::size_t j = i + 1; j < verts_.size(); ++j)
            d = std::max(d, (verts_[i] - verts_[j]).norm());
        return d;
      }
    }
    return 0.0;
  }

  bool contains(Vec2 p) const {
    switch (kind_) {
      case DomainKind::Disk:
        return (p - center_).norm2() <= radius_ * radius_;
      case DomainKind::Ellipse: {
        Vec2 q = p - center_;
        return sqr(q.x / axes_.x) + sqr(q.y / axes_.y) <= 1.0;
      }
      case DomainKind::Polygon: {
        for (std::size_t i = 0; i < verts_.size(); ++i) {
          Vec2 a = verts_[i], b = verts_[(i + 1) % verts_.size()];
          double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
          if (cross < 0) return false;
        }
        return true;
      }
    }
    return false;
  }

  double distance_to_boundary(Vec2 p) const {
    switch (kind_) {
      case DomainKind::Disk:
        return std::abs((p - center_).norm() - radius_);
      case DomainKind::Ellipse:
        return ellipse_boundary_distance(p - center_);
      case DomainKind::Polygon: {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < verts_.size(); ++i) {
          Vec2 a = verts_[i], b = verts_[(i + 1) % verts_.size()];
          best = std::min(best, point_segment_distance(p, a, b));
        }
        return best;
      }
    }
    return 0.0;
  }

  // distance to the closed set S (zero inside)
  double distance_to_set(Vec2 p) const {
    return contains(p) ? 0.0 : distance_to_boundary(p);
  }

  // distance to R^2 \ S, i.e. depth inside S (zero outside)
  double interior_depth(Vec2 p) const {
    return contains(p) ? distance_to_boundary(p) : 0.0;
  }

  // Monte-Carlo estimate of |{x : dist(x, dS) <= t}| with standard error;
  // analytic annulus for the disk.
  NeighborhoodArea neighborhood_area(double t, long samples = 100000,
                                     std::uint64_t seed = 12345) const {
    if (t <= 0) throw std::invalid_argument("neighborhood_area: t must be > 0");
    if (kind_ == DomainKind::Disk) {
      double r_out = radius_ + t;
      double r_in = std::max(0.0, radius_ - t);
      return {kPi * (r_out * r_out - r_in * r_in), 0.0, true};
    }
    if (samples < 10000)
      throw std::invalid_argument("neighborhood_area: samples >= 1e4 required");
    auto [lo, hi] = bounding_box();
    lo.x -= t; lo.y -= t; hi.x += t; hi.y += t;
    double box_area = (hi.x - lo.x) * (hi.y - lo.y);
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    long hits = 0;
    for (long i = 0; i < samples; ++i) {
      Vec2 p{ux(rng), uy(rng)};
      if (distance_to_boundary(p) <= t) ++hits;
    }
    double frac = static_cast<double>(hits) / samples;
    double se = box_area * std::sqrt(std::max(frac * (1 - frac), 1e-12 / samples) / samples);
    return {box_area * frac, se, false};
  }

  WellShapedDomain dilate(double a) const {
    if (a <= 0) throw std::invalid_argument("dilate: factor must be > 0");
    WellShapedDomain d = *this;
    d.center_ = center_ * a;
    d.radius_ = radius_ * a;
    d.axes_ = axes_ * a;
    for (auto& v : d.verts_) v = v * a;
    d.boundary_length_ = boundary_length_ * a;
    // ws constant is dilation invariant
    return d;
  }

  LatticeCount count_lattice_near_boundary(double t) const {
    if (t < 0) throw std::invalid_argument("count_lattice_near_boundary: t >= 0");
    auto [lo, hi] = bounding_box();
    long x0 = static_cast<long>(std::floor(lo.x - t)) - 1;
    long x1 = static_cast<long>(std::ceil(hi.x + t)) + 1;
    long y0 = static_cast<long>(std::floor(lo.y - t)) - 1;
    long y1 = static_cast<long>(std::ceil(hi.y + t)) + 1;
    long count = 0;
    for (long mx = x0; mx <= x1; ++mx)
      for (long my = y0; my <= y1; ++my)
        if (distance_to_boundary({double(mx), double(my)}) <= t) ++count;
    double bound = 4.0 * ws_constant_ * std::max(t * t, t * boundary_length_);
    return {count, bound};
  }

  std::pair<Vec2, Vec2> bounding_box() const {
    switch (kind_) {
      case DomainKind::Disk:
        return {{center_.x - radius_, center_.y - radius_},
                {center_.x + radius_, center_.y + radius_}};
      case DomainKind::Ellipse:
        return {{center_.x - axes_.x, center_.y - axes_.y},
                {center_.x + axes_.x, center_.y + axes_.y}};
      case DomainKind::Polygon: {
        Vec2 lo = verts_[0], hi = verts_[0];
        for (auto v : verts_) {
          lo.x = std::min(lo.x, v.x); lo.y = std::min(lo.y, v.y);
          hi.x = std::max(hi.x, v.x); hi.y = std::max(hi.y, v.y);
        }
        return {lo, hi};
      }
    }
    return {{0, 0}, {0, 0}};
  }

  static WellShapedDomain from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.contains("params"))
      throw std::invalid_argument("domain.parse: expected {kind, params}");
    std::string kind = j.at("kind").get<std::string>();
    const auto& p = j.at("params");
    std::optional<double> ws;
    if (j.contains("ws_constant")) ws = j.at("ws_constant").get<double>();
    if (kind == "disk") {
      auto c = p.at("center");
      return disk({c.at(0).get<double>(), c.at(1).get<double>()},
                  p.at("radius").get<double>(), ws);
    }
    if (kind == "ellipse") {
      auto c = p.at("center");
      auto a = p.at("semi_axes");
      return ellipse({c.at(0).get<double>(), c.at(1).get<double>()},
                     {a.at(0).get<double>(), a.at(1).get<double>()}, ws);
    }
    if (kind == "polygon") {
      std::vector<Vec2> vs;
      for (const auto& v : p.at("vertices"))
        vs.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      return polygon(std::move(vs), ws);
    }
    throw std::invalid_argument("domain.parse: unknown kind '" + kind + "'");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (kind_) {
      case DomainKind::Disk:
        j["kind"] = "disk";
        j["params"] = {{"center", {center_.x, center_.y}}, {"radius", radius_}};
        break;
      case DomainKind::Ellipse:
        j["kind"] = "ellipse";
        j["params"] = {{"center", {center_.x, center_.y}},
                       {"semi_axes", {axes_.x, axes_.y}}};
        break;
      case DomainKind::Polygon: {
        nlohmann::json vs = nlohmann::json::array();
        for (auto v : verts_) vs.push_back({v.x, v.y});
        j["kind"] = "polygon";
        j["params"] = {{"vertices", vs}};
        break;
      }
    }
    j["ws_constant"] = ws_constant_;
    return j;
  }

 private:
  // Empirical defaults; fit_ws_constant tightens them per domain.
  static constexpr double kDefaultDiskWs = 1.1;
  static constexpr double kDefaultConvexWs = 2.0;

  static double ellipse_perimeter(double a, double b) {
    // trapezoid on the smooth periodic speed; converges geometrically
    int n = 1 << 14;
    NeumaierSum s;
    for (int i = 0; i < n; ++i) {
      double t = kTwoPi * i / n;
      s.add(std::hypot(a * std::sin(t), b * std::cos(t)));
    }
    return s.value() * kTwoPi / n;
  }

  // Damped Newton on the parametric angle, seeded from a coarse scan, with
  // golden-section fallback. No closed form exists.
  double ellipse_boundary_distance(Vec2 q) const {
    double a = axes_.x, b = axes_.y;
    auto dist2 = [&](double t) {
      return sqr(a * std::cos(t) - q.x) + sqr(b * std::sin(t) - q.y);
    };
    // coarse scan
    int nscan = 256;
    double t_best = 0.0, d_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nscan; ++i) {
      double t = kTwoPi * i / nscan;
      double d = dist2(t);
      if (d < d_best) { d_best = d; t_best = t; }
    }
    // Newton on g(t) = d/dt dist2(t)/(-2)
    double t = t_best;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      double ct = std::cos(t), st = std::sin(t);
      double g = (a * a - b * b) * ct * st - q.x * a * st + q.y * b * ct;
      double gp = (a * a - b * b) * (ct * ct - st * st) - q.x * a * ct - q.y * b * st;
      if (std::abs(gp) < 1e-300) break;
      double step = g / gp;
      double damp = 1.0;
      double t_new = t - step;
      while (damp > 1e-4 && dist2(t_new) > dist2(t) + 1e-18) {
        damp *= 0.5;
        t_new = t - damp * step;
      }
      if (std::abs(t_new - t) < 1e-12) { t = t_new; converged = true; break; }
      t = t_new;
    }
    if (!converged) {
      // golden-section around the scan minimum
      double lo = t_best - kTwoPi / nscan, hi = t_best + kTwoPi / nscan;
      const double gr = 0.6180339887498949;
      double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
      for (int it = 0; it < 64; ++it) {
        if (dist2(c) < dist2(d)) { hi = d; d = c; c = hi - gr * (hi - lo); }
        else { lo = c; c = d; d = lo + gr * (hi - lo); }
      }
      t = 0.5 * (lo + hi);
    }
    return std::sqrt(dist2(t));
  }

  static double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 == 0) return (p - a).norm();
    double u = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * u)).norm();
  }

  DomainKind kind_ = DomainKind::Disk;
  Vec2 center_{0, 0};
  double radius_ = 1.0;
  Vec2 axes_{1, 1};
  std::vector<Vec2> verts_;
  double boundary_length_ = kTwoPi;
  double ws_constant_ = 1.1;
};

// Smallest C making the Def. 2.1 bound hold over a logarithmic t-grid.
inline double fit_ws_constant(const WellShapedDomain& dom, long samples = 1000000,
                              std::uint64_t seed = 777, int grid = 40) {
  double c = 0.0;
  for (int i = 0; i < grid; ++i) {
    double t = 1e-2 * std::pow(10.0 / 1e-2, double(i) / (grid - 1));
    auto na = dom.neighborhood_area(t, samples, seed + i);
    double denom = std::max(t * t, t * dom.boundary_length());
    c = std::max(c, (na.area + 3.0 * na.std_error) / denom);
  }
  return c;
}

}  // namespace sslo

#endif  // SSLO_GEOMETRY_HPP
