#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "berry/vec2.hpp"

namespace berry {

// Directed segment p + t (cos theta, sin theta), t in [0, L].
class OrientedSegment {
 public:
  OrientedSegment(Vec2 origin, double angle, double length);
  static OrientedSegment from_points(Vec2 a, Vec2 b);

  Vec2 origin() const { return origin_; }
  double angle() const { return angle_; }  // in [0, 2 pi)
  double length() const { return length_; }
  Vec2 direction() const { return dir_; }
  Vec2 normal() const { return {-dir_.y, dir_.x}; }
  Vec2 end() const { return origin_ + dir_ * length_; }
  Vec2 at(double t) const { return origin_ + dir_ * t; }
  OrientedSegment reversed() const;
  // Two pieces cut at arclength t in (0, L).
  std::pair<OrientedSegment, OrientedSegment> split(double t) const;

 private:
  Vec2 origin_;
  double angle_;
  double length_;
  Vec2 dir_;
};

class PolygonalChain {
 public:
  PolygonalChain() = default;
  // Throws GeometryError if consecutive segments do not join up, or if a
  // closed chain does not end at its start.
  explicit PolygonalChain(std::vector<OrientedSegment> segments, bool closed = false);
  // Chain through the given vertices.
  static PolygonalChain from_vertices(const std::vector<Vec2>& vertices, bool closed = false);

  const std::vector<OrientedSegment>& segments() const { return segments_; }
  bool closed() const { return closed_; }
  double length() const;
  PolygonalChain reversed() const;
  // Pairwise intersection scan. Advisory only.
  bool is_simple() const;

 private:
  std::vector<OrientedSegment> segments_;
  bool closed_ = false;
};

// [x0, x1] x [y0, y1].
struct RectDomain {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  static RectDomain anchored(double t1, double t2) { return {0.0, 0.0, t1, t2}; }
  static RectDomain unit() { return {}; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool degenerate() const { return !(x1 > x0) || !(y1 > y0); }
  bool contains(const RectDomain& r, double tol = 1e-12) const;
  RectDomain scaled(double r) const { return {x0 * r, y0 * r, x1 * r, y1 * r}; }
};

double overlap_area(const RectDomain& a, const RectDomain& b);

struct PartitionIndex {
  int K = 1;
  int i1 = 0;
  int i2 = 0;
  Vec2 point() const;
};

// Signed length of the common part of S and T: |S cap T| <n_S, n_T>.
double segment_signed_overlap(const OrientedSegment& s, const OrientedSegment& t);
double signed_length(const PolygonalChain& a, const PolygonalChain& c);

// Closed clockwise boundary starting at the lower-left corner. Normals point
// outward.
PolygonalChain rect_boundary_chain(const RectDomain& d);

PartitionIndex snap_to_partition(Vec2 t, int K);

// {"segments":[{"p":[x,y],"theta":r,"len":L},...],"closed":b}, a bare
// segment array, or {"rect":[t1,t2]} / {"rect":[x0,y0,x1,y1]}.
PolygonalChain chain_from_json(const nlohmann::json& j);
nlohmann::json chain_to_json(const PolygonalChain& c);

}  // namespace berry
