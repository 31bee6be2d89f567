#include "crashsynth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crashsynth/errors.hpp"

namespace crashsynth::geom {

double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

double distance(const Vec2& a, const Vec2& b) { return norm(b - a); }

Vec2 normalized(const Vec2& v) {
  double n = norm(v);
  if (n < 1e-12) throw GeometryError("cannot normalize a near-zero vector");
  return v / n;
}

Vec2 left_normal(const Vec2& v) { return {-v.y, v.x}; }

double angle_between_deg(const Vec2& a, const Vec2& b) {
  double na = norm(a);
  double nb = norm(b);
  if (na < 1e-12 || nb < 1e-12) throw GeometryError("angle of a near-zero vector is undefined");
  double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

double polygon_area(const Polygon& p) {
  if (p.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % p.size()];
    twice += cross(a, b);
  }
  return 0.5 * std::abs(twice);
}

Vec2 polygon_centroid(const Polygon& p) {
  if (p.empty()) throw GeometryError("centroid of an empty polygon");
  if (p.size() < 3) {
    Vec2 acc{0, 0};
    for (const Vec2& v : p) acc = acc + v;
    return acc / static_cast<double>(p.size());
  }
  double twice = 0.0;
  Vec2 acc{0, 0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % p.size()];
    double c = cross(a, b);
    twice += c;
    acc = acc + (a + b) * c;
  }
  if (std::abs(twice) < 1e-12) {
    Vec2 mean{0, 0};
    for (const Vec2& v : p) mean = mean + v;
    return mean / static_cast<double>(p.size());
  }
  return acc / (3.0 * twice);
}

bool is_counterclockwise(const Polygon& p) {
  if (p.size() < 3) return false;
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    twice += cross(p[i], p[(i + 1) % p.size()]);
  }
  return twice > 0.0;
}

Polygon normalize_polygon(const Polygon& p, double eps) {
  Polygon out;
  for (const Vec2& v : p) {
    if (out.empty() || distance(out.back(), v) > eps) out.push_back(v);
  }
  while (out.size() > 1 && distance(out.front(), out.back()) <= eps) out.pop_back();
  if (out.size() >= 3 && !is_counterclockwise(out)) std::reverse(out.begin(), out.end());
  return out;
}

bool point_in_convex(const Polygon& poly, const Vec2& p, double eps) {
  if (poly.size() < 3) return false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    if (cross(b - a, p - a) < -eps) return false;
  }
  return true;
}

double convex_inset_margin(const Polygon& poly, const Vec2& p) {
  if (poly.size() < 3) return -1.0;
  double best = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    double len = distance(a, b);
    if (len < 1e-12) continue;
    best = std::min(best, cross(b - a, p - a) / len);
  }
  return best;
}

Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return distance(a, b) < 1e-9; }),
            pts.end());
  std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 1e-12) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 1e-12) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

Polygon convex_intersection(const Polygon& a, const Polygon& b) {
  if (a.size() < 3 || b.size() < 3) return {};
  Polygon out = a;
  for (std::size_t i = 0; i < b.size() && !out.empty(); ++i) {
    const Vec2& ca = b[i];
    const Vec2& cb = b[(i + 1) % b.size()];
    Vec2 edge = cb - ca;
    Polygon in = std::move(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Vec2& p = in[j];
      const Vec2& q = in[(j + 1) % in.size()];
      double sp = cross(edge, p - ca);
      double sq = cross(edge, q - ca);
      if (sp >= -1e-12) out.push_back(p);
      if ((sp > 1e-12 && sq < -1e-12) || (sp < -1e-12 && sq > 1e-12)) {
        double t = sp / (sp - sq);
        out.push_back(p + (q - p) * t);
      }
    }
  }
  out = normalize_polygon(out);
  if (out.size() < 3) return {};
  return out;
}

Polygon segment_rectangle(const Vec2& a, const Vec2& b, double half_width) {
  Vec2 u = normalized(b - a);
  Vec2 n = left_normal(u) * half_width;
  return normalize_polygon({a - n, b - n, b + n, a + n});
}

Polygon convex_inset(const Polygon& poly, double inset) {
  if (poly.size() < 3) return {};
  // Clip against each edge shifted inward; convexity is preserved.
  Polygon out = poly;
  for (std::size_t i = 0; i < poly.size() && !out.empty(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    Vec2 n = normalized(left_normal(b - a));
    Vec2 sa = a + n * inset;
    Vec2 sb = b + n * inset;
    Vec2 edge = sb - sa;
    Polygon in = std::move(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Vec2& p = in[j];
      const Vec2& q = in[(j + 1) % in.size()];
      double sp = cross(edge, p - sa);
      double sq = cross(edge, q - sa);
      if (sp >= -1e-12) out.push_back(p);
      if ((sp > 1e-12 && sq < -1e-12) || (sp < -1e-12 && sq > 1e-12)) {
        double t = sp / (sp - sq);
        out.push_back(p + (q - p) * t);
      }
    }
  }
  out = normalize_polygon(out);
  if (out.size() < 3 || polygon_area(out) < 1e-9) return {};
  return out;
}

namespace {

void obb_corners(const Obb& box, Vec2 out[4]) {
  Vec2 u = normalized(box.heading);
  Vec2 v = left_normal(u);
  Vec2 he = u * (box.length * 0.5);
  Vec2 hn = v * (box.width * 0.5);
  out[0] = box.center + he + hn;
  out[1] = box.center + he - hn;
  out[2] = box.center - he - hn;
  out[3] = box.center - he + hn;
}

bool separated_on_axis(const Vec2 a[4], const Vec2 b[4], const Vec2& axis) {
  double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
  for (int i = 0; i < 4; ++i) {
    double pa = dot(a[i], axis);
    double pb = dot(b[i], axis);
    amin = std::min(amin, pa);
    amax = std::max(amax, pa);
    bmin = std::min(bmin, pb);
    bmax = std::max(bmax, pb);
  }
  return amax < bmin || bmax < amin;
}

}  // namespace

bool obb_overlap(const Obb& a, const Obb& b) {
  Vec2 ca[4], cb[4];
  obb_corners(a, ca);
  obb_corners(b, cb);
  Vec2 ua = normalized(a.heading);
  Vec2 ub = normalized(b.heading);
  const Vec2 axes[4] = {ua, left_normal(ua), ub, left_normal(ub)};
  for (const Vec2& axis : axes) {
    if (separated_on_axis(ca, cb, axis)) return false;
  }
  return true;
}

double lateral_offset(const Vec2& p, const Vec2& a, const Vec2& dir) {
  Vec2 u = normalized(dir);
  return cross(u, p - a);
}

double longitudinal_offset(const Vec2& p, const Vec2& a, const Vec2& dir) {
  Vec2 u = normalized(dir);
  return dot(u, p - a);
}

}  // namespace crashsynth::geom
