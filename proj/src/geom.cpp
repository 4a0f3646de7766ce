#include "drivelab/geom.hpp"

#include <algorithm>
#include <array>
#include <cassert>

namespace drivelab {

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 < 1e-18) return dist(p, a);
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, a + ab * t);
}

namespace {
int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = (b - a).cross(c - a);
  if (v > 1e-12) return 1;
  if (v < -1e-12) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return p.x <= std::max(a.x, b.x) + 1e-12 && p.x >= std::min(a.x, b.x) - 1e-12 &&
         p.y <= std::max(a.y, b.y) + 1e-12 && p.y >= std::min(a.y, b.y) - 1e-12;
}
}  // namespace

bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
  const int o1 = orientation(a1, a2, b1);
  const int o2 = orientation(a1, a2, b2);
  const int o3 = orientation(b1, b2, a1);
  const int o4 = orientation(b1, b2, a2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a1, a2, b1)) return true;
  if (o2 == 0 && on_segment(a1, a2, b2)) return true;
  if (o3 == 0 && on_segment(b1, b2, a1)) return true;
  if (o4 == 0 && on_segment(b1, b2, a2)) return true;
  return false;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xi = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xi) inside = !inside;
    }
  }
  return inside;
}

Polyline::Polyline(std::vector<Vec2> points) : pts_(std::move(points)) {
  cum_.resize(pts_.size(), 0.0);
  for (std::size_t i = 1; i < pts_.size(); ++i) {
    cum_[i] = cum_[i - 1] + dist(pts_[i - 1], pts_[i]);
  }
}

Vec2 Polyline::point_at(double s) const {
  assert(!pts_.empty());
  if (pts_.size() == 1 || s <= 0.0) return pts_.front();
  if (s >= length()) return pts_.back();
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cum_.begin());
  const double seg = cum_[i] - cum_[i - 1];
  const double t = seg > 1e-12 ? (s - cum_[i - 1]) / seg : 0.0;
  return pts_[i - 1] + (pts_[i] - pts_[i - 1]) * t;
}

double Polyline::heading_at(double s) const {
  assert(pts_.size() >= 2);
  s = std::clamp(s, 0.0, length());
  std::size_t i = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin());
  i = std::clamp<std::size_t>(i, 1, pts_.size() - 1);
  const Vec2 d = pts_[i] - pts_[i - 1];
  return std::atan2(d.y, d.x);
}

Polyline::Projection Polyline::project_range(const Vec2& p, std::size_t i0, std::size_t i1) const {
  Projection best;
  best.dist = std::numeric_limits<double>::max();
  for (std::size_t i = i0; i + 1 <= i1; ++i) {
    const Vec2& a = pts_[i];
    const Vec2& b = pts_[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    double t = len2 > 1e-18 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a + ab * t;
    const double d = dist(p, q);
    if (d < best.dist) {
      best.dist = d;
      best.station = cum_[i] + t * std::sqrt(len2);
      best.lateral = ab.norm() > 1e-12 ? (ab.cross(p - a)) / ab.norm() : 0.0;
    }
  }
  return best;
}

Polyline::Projection Polyline::project(const Vec2& p) const {
  assert(pts_.size() >= 2);
  return project_range(p, 0, pts_.size() - 1);
}

Polyline::Projection Polyline::project_near(const Vec2& p, double s_hint, double window) const {
  assert(pts_.size() >= 2);
  const double lo = s_hint - window, hi = s_hint + window;
  std::size_t i0 = static_cast<std::size_t>(
      std::lower_bound(cum_.begin(), cum_.end(), lo) - cum_.begin());
  std::size_t i1 = static_cast<std::size_t>(
      std::upper_bound(cum_.begin(), cum_.end(), hi) - cum_.begin());
  i0 = i0 > 0 ? i0 - 1 : 0;
  i1 = std::min(i1, pts_.size() - 1);
  if (i0 >= i1) return project(p);
  return project_range(p, i0, i1);
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 fx = Vec2{1.0, 0.0}.rotated(heading) * half_len;
  const Vec2 fy = Vec2{0.0, 1.0}.rotated(heading) * half_wid;
  return {center + fx + fy, center + fx - fy, center - fx - fy, center - fx + fy};
}

bool OrientedBox::contains(const Vec2& p) const {
  const Vec2 d = (p - center).rotated(-heading);
  return std::abs(d.x) <= half_len && std::abs(d.y) <= half_wid;
}

bool OrientedBox::overlaps(const OrientedBox& o) const {
  const auto ca = corners();
  const auto cb = o.corners();
  const std::array<Vec2, 4> axes = {Vec2{std::cos(heading), std::sin(heading)},
                                    Vec2{-std::sin(heading), std::cos(heading)},
                                    Vec2{std::cos(o.heading), std::sin(o.heading)},
                                    Vec2{-std::sin(o.heading), std::cos(o.heading)}};
  for (const Vec2& ax : axes) {
    double amin = std::numeric_limits<double>::max(), amax = -amin;
    double bmin = amin, bmax = amax;
    for (const Vec2& c : ca) {
      const double v = c.dot(ax);
      amin = std::min(amin, v);
      amax = std::max(amax, v);
    }
    for (const Vec2& c : cb) {
      const double v = c.dot(ax);
      bmin = std::min(bmin, v);
      bmax = std::max(bmax, v);
    }
    if (amax < bmin || bmax < amin) return false;
  }
  return true;
}

std::vector<Vec2> densify(const std::vector<Vec2>& pts, double step) {
  std::vector<Vec2> out;
  if (pts.empty()) return out;
  out.push_back(pts.front());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 a = pts[i - 1];
    const Vec2 b = pts[i];
    const double d = dist(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(d / step)));
    for (int k = 1; k <= n; ++k) {
      out.push_back(a + (b - a) * (static_cast<double>(k) / n));
    }
  }
  return out;
}

}  // namespace drivelab
