#pragma once

#include <cstddef>
#include <vector>

namespace crashsynth::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
};

double dot(const Vec2& a, const Vec2& b);
// z component of a x b; positive when b points left of a.
double cross(const Vec2& a, const Vec2& b);
double norm(const Vec2& v);
double distance(const Vec2& a, const Vec2& b);
Vec2 normalized(const Vec2& v);
// 90 degree counterclockwise rotation (left normal of a direction).
Vec2 left_normal(const Vec2& v);
// Angle between two directions in degrees, in [0, 180].
double angle_between_deg(const Vec2& a, const Vec2& b);

// Convex polygon, counterclockwise vertex order, no repeated closing vertex.
using Polygon = std::vector<Vec2>;

double polygon_area(const Polygon& p);
Vec2 polygon_centroid(const Polygon& p);
bool is_counterclockwise(const Polygon& p);
// Reorders to counterclockwise and drops near-duplicate vertices.
Polygon normalize_polygon(const Polygon& p, double eps = 1e-9);

// Boundary-inclusive membership test for a convex CCW polygon.
bool point_in_convex(const Polygon& poly, const Vec2& p, double eps = 1e-9);

// Smallest signed distance from p to the polygon's edges; positive inside.
double convex_inset_margin(const Polygon& poly, const Vec2& p);

// Convex hull (monotone chain) of an arbitrary point set, CCW.
Polygon convex_hull(std::vector<Vec2> points);

// Intersection of two convex polygons (Sutherland-Hodgman clip of a against
// b). Result is CCW; empty when the polygons are disjoint or degenerate.
Polygon convex_intersection(const Polygon& a, const Polygon& b);

// Axis-aligned or rotated rectangle helpers.
// Rectangle spanned by a centerline segment [a, b] widened by half_width on
// each side, CCW.
Polygon segment_rectangle(const Vec2& a, const Vec2& b, double half_width);

// Shrinks a convex polygon by moving every edge inward by `inset`. Returns an
// empty polygon when the inset swallows the shape.
Polygon convex_inset(const Polygon& poly, double inset);

// Oriented bounding box: center, unit heading of the long axis, and full
// extents (length along heading, width across).
struct Obb {
  Vec2 center;
  Vec2 heading;
  double length = 0.0;
  double width = 0.0;
};

// Separating-axis overlap test between two oriented boxes.
bool obb_overlap(const Obb& a, const Obb& b);

// Signed lateral offset of p from the infinite line through a in direction
// dir (unit not required); positive to the left of dir.
double lateral_offset(const Vec2& p, const Vec2& a, const Vec2& dir);
// Longitudinal coordinate of p along dir, measured from a.
double longitudinal_offset(const Vec2& p, const Vec2& a, const Vec2& dir);

}  // namespace crashsynth::geom
