#ifndef DRIVELAB_GEOM_HPP
#define DRIVELAB_GEOM_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace drivelab {

inline constexpr double kPi = 3.14159265358979323846;

/// Normalize an angle to (-pi, pi].
inline double normalize_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

struct Vec2 {
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  Vec2 rotated(double angle) const {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
  Vec2 perp() const { return {-y, x}; }  // 90 deg counter-clockwise
};

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Planar pose: position plus heading in (-pi, pi]. +x forward, +y left.
struct Pose2 {
  double x{0.0};
  double y{0.0};
  double heading{0.0};

  Vec2 position() const { return {x, y}; }
  Vec2 forward() const { return {std::cos(heading), std::sin(heading)}; }

  Vec2 to_world(const Vec2& local) const { return position() + local.rotated(heading); }
  Vec2 to_local(const Vec2& world) const { return (world - position()).rotated(-heading); }

  Pose2 to_world(const Pose2& local) const {
    const Vec2 p = to_world(local.position());
    return {p.x, p.y, normalize_angle(heading + local.heading)};
  }
  Pose2 to_local(const Pose2& world) const {
    const Vec2 p = to_local(world.position());
    return {p.x, p.y, normalize_angle(world.heading - heading)};
  }

  /// Pose G such that G.to_local == this->to_world and vice versa.
  Pose2 inverse() const {
    const Vec2 p = Vec2{-x, -y}.rotated(-heading);
    return {p.x, p.y, normalize_angle(-heading)};
  }
};

inline Pose2 make_pose(double x, double y, double heading) {
  return {x, y, normalize_angle(heading)};
}

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);

/// True if segments [a1,a2] and [b1,b2] intersect (including touching).
bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2);

/// Even-odd rule point-in-polygon test.
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);

/// Polyline with cached cumulative arc lengths for station/lateral queries.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return pts_; }
  bool empty() const { return pts_.size() < 2; }
  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }

  Vec2 point_at(double s) const;
  double heading_at(double s) const;

  struct Projection {
    double station{0.0};
    double lateral{0.0};  // signed, +left of travel direction
    double dist{0.0};
  };
  Projection project(const Vec2& p) const;
  /// Projection restricted to stations within [s_hint - window, s_hint + window].
  Projection project_near(const Vec2& p, double s_hint, double window) const;

 private:
  Projection project_range(const Vec2& p, std::size_t i0, std::size_t i1) const;

  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

/// Oriented rectangle (vehicle footprint). half_len along heading, half_wid across.
struct OrientedBox {
  Vec2 center;
  double heading{0.0};
  double half_len{0.0};
  double half_wid{0.0};

  std::array<Vec2, 4> corners() const;
  bool contains(const Vec2& p) const;
  bool overlaps(const OrientedBox& o) const;
};

/// Resample a polyline so consecutive points are at most `step` apart.
std::vector<Vec2> densify(const std::vector<Vec2>& pts, double step);

}  // namespace drivelab

#endif  // DRIVELAB_GEOM_HPP
