#include "berry/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "berry/error.hpp"

namespace berry {
namespace {

constexpr double kTol = 1e-9;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

// Direction vector with exact values on the axes, so that rectangle edges are
// exactly axis-aligned.
Vec2 unit_direction(double a) {
  const double q = a / (0.5 * std::numbers::pi);
  const double r = std::nearbyint(q);
  if (std::abs(q - r) < 1e-15) {
    switch (static_cast<int>(r) & 3) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return {std::cos(a), std::sin(a)};
}

bool same_point(Vec2 a, Vec2 b) { return norm(a - b) <= kTol; }

// Closed segments [a,b] and [c,d] intersect.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
    const double v = cross(q - p, r - p);
    return std::abs(v) <= 1e-14 ? 0 : (v > 0 ? 1 : -1);
  };
  auto on_seg = [](Vec2 p, Vec2 q, Vec2 r) {
    return std::min(p.x, q.x) - 1e-14 <= r.x && r.x <= std::max(p.x, q.x) + 1e-14 &&
           std::min(p.y, q.y) - 1e-14 <= r.y && r.y <= std::max(p.y, q.y) + 1e-14;
  };
  const int o1 = orient(a, b, c);
  const int o2 = orient(a, b, d);
  const int o3 = orient(c, d, a);
  const int o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_seg(a, b, c)) return true;
  if (o2 == 0 && on_seg(a, b, d)) return true;
  if (o3 == 0 && on_seg(c, d, a)) return true;
  if (o4 == 0 && on_seg(c, d, b)) return true;
  return false;
}

}  // namespace

OrientedSegment::OrientedSegment(Vec2 origin, double angle, double length)
    : origin_(origin), angle_(wrap_angle(angle)), length_(length) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw GeometryError("segment length must be positive");
  if (!std::isfinite(angle) || !std::isfinite(origin.x) || !std::isfinite(origin.y))
    throw GeometryError("segment has non-finite data");
  dir_ = unit_direction(angle_);
}

OrientedSegment OrientedSegment::from_points(Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  return OrientedSegment(a, std::atan2(d.y, d.x), norm(d));
}

OrientedSegment OrientedSegment::reversed() const {
  return OrientedSegment(end(), angle_ + std::numbers::pi, length_);
}

std::pair<OrientedSegment, OrientedSegment> OrientedSegment::split(double t) const {
  if (!(t > 0.0 && t < length_)) throw GeometryError("split point must be interior");
  return {OrientedSegment(origin_, angle_, t), OrientedSegment(at(t), angle_, length_ - t)};
}

PolygonalChain::PolygonalChain(std::vector<OrientedSegment> segments, bool closed)
    : segments_(std::move(segments)), closed_(closed) {
  if (segments_.empty()) throw GeometryError("chain needs at least one segment");
  for (std::size_t k = 0; k + 1 < segments_.size(); ++k)
    if (!same_point(segments_[k].end(), segments_[k + 1].origin()))
      throw GeometryError("chain segments do not join at segment " + std::to_string(k));
  if (closed_ && !same_point(segments_.back().end(), segments_.front().origin()))
    throw GeometryError("closed chain does not return to its start");
}

PolygonalChain PolygonalChain::from_vertices(const std::vector<Vec2>& v, bool closed) {
  if (v.size() < 2) throw GeometryError("chain needs at least two vertices");
  std::vector<OrientedSegment> segs;
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    segs.push_back(OrientedSegment::from_points(v[k], v[k + 1]));
  if (closed && !same_point(v.back(), v.front()))
    segs.push_back(OrientedSegment::from_points(v.back(), v.front()));
  return PolygonalChain(std::move(segs), closed);
}

double PolygonalChain::length() const {
  double s = 0.0;
  for (const auto& seg : segments_) s += seg.length();
  return s;
}

PolygonalChain PolygonalChain::reversed() const {
  std::vector<OrientedSegment> r;
  r.reserve(segments_.size());
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) r.push_back(it->reversed());
  return PolygonalChain(std::move(r), closed_);
}

bool PolygonalChain::is_simple() const {
  const std::size_t n = segments_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = segments_[i];
      const auto& b = segments_[j];
      const bool adjacent = j == i + 1 || (closed_ && i == 0 && j == n - 1);
      if (adjacent) {
        // Neighbours share a vertex; they must not fold back onto each other.
        if (std::abs(segment_signed_overlap(a, b)) > kTol) return false;
        continue;
      }
      if (segments_intersect(a.origin(), a.end(), b.origin(), b.end())) return false;
    }
  }
  return true;
}

bool RectDomain::contains(const RectDomain& r, double tol) const {
  return r.x0 >= x0 - tol && r.y0 >= y0 - tol && r.x1 <= x1 + tol && r.y1 <= y1 + tol;
}

double overlap_area(const RectDomain& a, const RectDomain& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

Vec2 PartitionIndex::point() const {
  const double n = std::ldexp(1.0, K);
  return {i1 / n, i2 / n};
}

double segment_signed_overlap(const OrientedSegment& s, const OrientedSegment& t) {
  double da = std::fmod(std::abs(s.angle() - t.angle()), std::numbers::pi);
  da = std::min(da, std::numbers::pi - da);
  if (da > kTol) return 0.0;
  const Vec2 d = s.direction();
  const Vec2 q0 = t.origin() - s.origin();
  const Vec2 q1 = t.end() - s.origin();
  if (std::abs(cross(d, q0)) > kTol || std::abs(cross(d, q1)) > kTol) return 0.0;
  const double u0 = dot(q0, d);
  const double u1 = dot(q1, d);
  const double lo = std::max(0.0, std::min(u0, u1));
  const double hi = std::min(s.length(), std::max(u0, u1));
  if (hi <= lo) return 0.0;
  return (hi - lo) * (dot(s.direction(), t.direction()) > 0.0 ? 1.0 : -1.0);
}

double signed_length(const PolygonalChain& a, const PolygonalChain& c) {
  double s = 0.0;
  for (const auto& t : a.segments())
    for (const auto& u : c.segments()) s += segment_signed_overlap(t, u);
  return s;
}

PolygonalChain rect_boundary_chain(const RectDomain& d) {
  if (d.degenerate()) throw GeometryError("degenerate rectangle has no boundary chain");
  const double w = d.width();
  const double h = d.height();
  const double pi = std::numbers::pi;
  std::vector<OrientedSegment> segs{
      OrientedSegment({d.x0, d.y0}, 0.5 * pi, h),
      OrientedSegment({d.x0, d.y1}, 0.0, w),
      OrientedSegment({d.x1, d.y1}, 1.5 * pi, h),
      OrientedSegment({d.x1, d.y0}, pi, w),
  };
  return PolygonalChain(std::move(segs), true);
}

PartitionIndex snap_to_partition(Vec2 t, int K) {
  if (K < 1 || K > 30) throw DomainError("partition level K must be in [1, 30]");
  if (!(t.x >= 0.0 && t.x <= 1.0 && t.y >= 0.0 && t.y <= 1.0))
    throw DomainError("snap_to_partition: point outside the unit square");
  const int n = 1 << K;
  auto snap = [n](double v) { return std::min(n, static_cast<int>(std::floor(v * n))); };
  return {K, snap(t.x), snap(t.y)};
}

PolygonalChain chain_from_json(const nlohmann::json& j) {
  try {
    if (j.is_object() && j.contains("rect")) {
      const auto& r = j.at("rect");
      if (r.size() == 2) return rect_boundary_chain(RectDomain::anchored(r[0], r[1]));
      if (r.size() == 4) return rect_boundary_chain({r[0], r[1], r[2], r[3]});
      throw ConfigError("rect must have 2 or 4 entries");
    }
    const nlohmann::json& arr = j.is_array() ? j : j.at("segments");
    const bool closed = j.is_object() ? j.value("closed", false) : false;
    std::vector<OrientedSegment> segs;
    for (const auto& s : arr) {
      const auto& p = s.at("p");
      segs.emplace_back(Vec2{p.at(0).get<double>(), p.at(1).get<double>()},
                        s.at("theta").get<double>(), s.at("len").get<double>());
    }
    return PolygonalChain(std::move(segs), closed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad chain literal: ") + e.what());
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("invalid chain: ") + e.what());
  }
}

nlohmann::json chain_to_json(const PolygonalChain& c) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : c.segments())
    segs.push_back({{"p", {s.origin().x, s.origin().y}}, {"theta", s.angle()}, {"len", s.length()}});
  return {{"segments", segs}, {"closed", c.closed()}};
}

}  // namespace berry
