#include "drivelab/worldgen.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "drivelab/mining.hpp"
#include "drivelab/rng.hpp"
#include "drivelab/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace drivelab {

void GenRanges::validate() const {
  auto check = [](double lo, double hi, const char* what) {
    if (!(lo < hi)) throw std::invalid_argument(std::string("degenerate range: ") + what);
  };
  check(width_jitter_lo, width_jitter_hi, "width_jitter");
  check(speed_frac_lo, speed_frac_hi, "speed_frac");
  check(highway_limit_lo, highway_limit_hi, "highway_limit");
  check(mainroad_limit_lo, mainroad_limit_hi, "mainroad_limit");
  check(subroad_limit_lo, subroad_limit_hi, "subroad_limit");
}

std::int64_t GenSpec::total() const {
  std::int64_t n = 0;
  for (const auto& [_, c] : counts) n += c;
  return n;
}

void GenSpec::validate() const {
  if (total() <= 0) throw std::invalid_argument("generation spec: total count must be positive");
  for (const auto& [t, c] : counts) {
    if (t == ScenarioType::AMBIGUOUS) {
      throw std::invalid_argument("generation spec: cannot generate AMBIGUOUS scenes");
    }
    if (c < 0) throw std::invalid_argument("generation spec: negative count for " + to_string(t));
  }
  ranges.validate();
}

namespace {

constexpr double kSimRate = 10.0;
constexpr double kEpisode = 15.0;
constexpr double kEgoFrontLen = kEgoLength - kEgoRearOverhang;

double smooth01(double u) { return 0.5 * (1.0 - std::cos(kPi * std::clamp(u, 0.0, 1.0))); }

std::vector<Vec2> rect_poly(double x0, double x1, double y0, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

int add_lane(RoadMap& map, int road_id, RoadClass cls, double width, double limit,
             std::vector<Vec2> pts, DividerStyle left, DividerStyle right) {
  LaneSegment lane;
  lane.id = static_cast<int>(map.lanes.size());
  lane.road_id = road_id;
  lane.road_class = cls;
  lane.width = width;
  lane.speed_limit = limit;
  lane.centerline = std::move(pts);
  lane.left_divider = left;
  lane.right_divider = right;
  map.lanes.push_back(std::move(lane));
  return map.lanes.back().id;
}

/// One-way lanes along +x, left to right; lane i center y = y_top - i * width.
std::vector<int> add_one_way(RoadMap& map, int road_id, RoadClass cls, int n, double width,
                             double limit, double length, double y_top) {
  std::vector<int> ids;
  for (int i = 0; i < n; ++i) {
    const double y = y_top - i * width;
    const DividerStyle left = i == 0 ? DividerStyle::SOLID : DividerStyle::DASHED;
    const DividerStyle right = i == n - 1 ? DividerStyle::SOLID : DividerStyle::DASHED;
    ids.push_back(add_lane(map, road_id, cls, width, limit, {{0.0, y}, {length, y}}, left, right));
  }
  map.drivable_area.push_back(rect_poly(-10.0, length + 10.0, y_top - (n - 1) * width - width / 2.0 - 0.6,
                                        y_top + width / 2.0 + 0.6));
  return ids;
}

std::vector<AgentState> sample_states(const std::function<void(double, Pose2&, double&)>& fn) {
  std::vector<AgentState> states;
  const int n = static_cast<int>((kEpisode + 2.0) * kSimRate) + 1;
  states.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = -2.0 + i / kSimRate;
    AgentState st;
    st.t = t;
    fn(t, st.pose, st.speed);
    states.push_back(st);
  }
  return states;
}

AgentTrack static_obstacle(int id, const Pose2& pose, double len, double wid) {
  AgentTrack a;
  a.id = id;
  a.cls = AgentClass::STATIC_OBSTACLE;
  a.length = len;
  a.width = wid;
  a.states = sample_states([&](double, Pose2& p, double& v) {
    p = pose;
    v = 0.0;
  });
  return a;
}

/// Constant-speed vehicle along a path; station s_ref at t = 0. The path is
/// extended past its end so late samples stay well defined.
AgentTrack const_vehicle(int id, const std::vector<Vec2>& path_pts, double s_ref, double speed) {
  std::vector<Vec2> pts = path_pts;
  const Vec2 d = pts.back() - pts[pts.size() - 2];
  const double n = d.norm();
  if (n > 1e-9) pts.push_back(pts.back() + d * (600.0 / n));
  const Polyline path(pts);
  AgentTrack a;
  a.id = id;
  a.cls = AgentClass::VEHICLE;
  a.states = sample_states([&](double t, Pose2& p, double& v) {
    const double s = std::max(0.5, s_ref + speed * t);
    const Vec2 pos = path.point_at(s);
    p = {pos.x, pos.y, path.heading_at(s)};
    v = speed;
  });
  return a;
}

/// Stationary until t_go, then accelerates along the path to v_max.
AgentTrack queue_vehicle(int id, const std::vector<Vec2>& path_pts, double s_stop, double t_go,
                         double accel, double v_max) {
  std::vector<Vec2> pts = path_pts;
  const Vec2 d = pts.back() - pts[pts.size() - 2];
  const double n = d.norm();
  if (n > 1e-9) pts.push_back(pts.back() + d * (600.0 / n));
  const Polyline path(pts);
  const double t_full = v_max / accel;
  AgentTrack a;
  a.id = id;
  a.cls = AgentClass::VEHICLE;
  a.states = sample_states([&](double t, Pose2& p, double& v) {
    double s = s_stop;
    v = 0.0;
    if (t > t_go) {
      const double tau = t - t_go;
      if (tau < t_full) {
        s += 0.5 * accel * tau * tau;
        v = accel * tau;
      } else {
        s += 0.5 * v_max * t_full + v_max * (tau - t_full);
        v = v_max;
      }
    }
    const Vec2 pos = path.point_at(s);
    p = {pos.x, pos.y, path.heading_at(s)};
  });
  return a;
}

AgentTrack pedestrian(int id, const Vec2& start, const Vec2& dir_unit, double speed,
                      double t_start, double walk_dist) {
  AgentTrack a;
  a.id = id;
  a.cls = AgentClass::PEDESTRIAN;
  a.length = 0.6;
  a.width = 0.6;
  const double heading = std::atan2(dir_unit.y, dir_unit.x);
  a.states = sample_states([&](double t, Pose2& p, double& v) {
    const double walked = std::clamp(speed * (t - t_start), 0.0, walk_dist);
    const Vec2 pos = start + dir_unit * walked;
    p = {pos.x, pos.y, heading};
    v = (t >= t_start && walked < walk_dist) ? speed : 0.0;
  });
  return a;
}

Trajectory history_on_path(const Polyline& path, double s0, double v0) {
  Trajectory h;
  h.sample_rate_hz = kHistoryRateHz;
  for (int k = 0; k < kHistorySamples; ++k) {
    const double t = -1.9 + 0.1 * k;
    Waypoint wp;
    wp.t = t;
    const double s = std::max(0.5, s0 + v0 * t);
    const Vec2 pos = path.point_at(s);
    wp.pose = {pos.x, pos.y, path.heading_at(s)};
    wp.speed = v0;
    h.waypoints.push_back(wp);
  }
  return h;
}

Trajectory history_stopped(const Pose2& pose) {
  Trajectory h;
  h.sample_rate_hz = kHistoryRateHz;
  for (int k = 0; k < kHistorySamples; ++k) {
    h.waypoints.push_back({-1.9 + 0.1 * k, pose, 0.0});
  }
  return h;
}

/// Straight-road reference path with an optional piecewise lateral profile.
std::vector<Vec2> path_y_of_x(double x0, double x1, const std::function<double(double)>& y_of_x) {
  std::vector<Vec2> pts;
  for (double x = x0; x < x1; x += 2.0) pts.push_back({x, y_of_x(x)});
  pts.push_back({x1, y_of_x(x1)});
  return pts;
}

struct B {  // builder context
  Rng rng;
  const GenRanges& R;
  Scene s;
  int next_agent_id{100};

  B(std::uint64_t seed, const GenRanges& ranges) : rng(seed), R(ranges) {
    s.episode_duration = kEpisode;
  }

  double jitter_w(double base) { return base * rng.uniform(R.width_jitter_lo, R.width_jitter_hi); }
  double limit(RoadClass cls) {
    switch (cls) {
      case RoadClass::HIGHWAY: return rng.uniform(R.highway_limit_lo, R.highway_limit_hi);
      case RoadClass::MAINROAD: return rng.uniform(R.mainroad_limit_lo, R.mainroad_limit_hi);
      case RoadClass::SUBROAD: return rng.uniform(R.subroad_limit_lo, R.subroad_limit_hi);
    }
    return 10.0;
  }

  void finish(const std::vector<Vec2>& route_pts, Command cmd, RoadClass target,
              double dist_to_int) {
    s.nav.route = densify(route_pts, 1.0);
    s.nav.command = cmd;
    s.nav.target_road_class = target;
    s.nav.distance_to_intersection = dist_to_int;
  }

  /// Ambient traffic in non-ego lanes, placed so it never enters the ego
  /// corridor or the target lane of a lane change.
  void add_ambient(const std::vector<int>& lane_ids, int ego_lane, int exclude_lane, double s0) {
    for (int id : lane_ids) {
      if (id == ego_lane || id == exclude_lane) continue;
      if (!rng.bernoulli(R.ambient_density / std::max(1.0, lane_ids.size() - 1.0))) continue;
      const LaneSegment& lane = s.road_map.lanes[id];
      const double v = lane.speed_limit * rng.uniform(0.7, 0.92);
      const double offset = rng.bernoulli(0.6) ? rng.uniform(25.0, 70.0) : -rng.uniform(18.0, 40.0);
      s.agents.push_back(const_vehicle(next_agent_id++, lane.centerline, s0 + offset, v));
    }
  }
};

// ---------------------------------------------------------------------------
// Straight-road scenarios (cruise / lane change / nudge / transitions)
// ---------------------------------------------------------------------------

struct StraightSetup {
  std::vector<int> lanes;
  int ego_lane{0};
  double s0{0.0};
  double v0{0.0};
  double length{0.0};
};

StraightSetup make_straight(B& b, RoadClass cls, int n_lanes, int ego_idx, double speed_frac_lo,
                            double speed_frac_hi) {
  StraightSetup st;
  const double base_w = cls == RoadClass::HIGHWAY ? 3.75 : (cls == RoadClass::MAINROAD ? 3.5 : 3.0);
  const double w = b.jitter_w(base_w);
  const double lim = b.limit(cls);
  st.length = cls == RoadClass::HIGHWAY ? 650.0 : (cls == RoadClass::MAINROAD ? 420.0 : 300.0);
  st.lanes = add_one_way(b.s.road_map, 0, cls, n_lanes, w, lim, st.length,
                         (n_lanes - 1) * w / 2.0);
  st.ego_lane = st.lanes[ego_idx];
  st.v0 = lim * b.rng.uniform(speed_frac_lo, speed_frac_hi);
  st.s0 = std::max(st.v0 * 2.1, 30.0) + b.rng.uniform(0.0, 15.0);
  return st;
}

Scene build_cruise(B& b, RoadClass cls) {
  const int n = cls == RoadClass::HIGHWAY ? 3 : (cls == RoadClass::MAINROAD ? 2 : 1);
  const int ego_idx = n > 1 ? static_cast<int>(b.rng.uniform_int(0, n - 1)) : 0;
  StraightSetup st = make_straight(b, cls, n, ego_idx, b.R.speed_frac_lo, b.R.speed_frac_hi);
  const LaneSegment& ego = b.s.road_map.lanes[st.ego_lane];
  const Polyline path(ego.centerline);
  b.s.ego_history = history_on_path(path, st.s0, st.v0);
  b.add_ambient(st.lanes, st.ego_lane, -1, st.s0);
  // Same-lane follower well behind, matching speed.
  if (b.rng.bernoulli(0.35)) {
    b.s.agents.push_back(
        const_vehicle(b.next_agent_id++, ego.centerline, st.s0 - b.rng.uniform(24.0, 40.0), st.v0));
  }
  b.finish(ego.centerline, Command::KEEP, cls, kNoIntersection);
  return b.s;
}

Scene build_lane_change(B& b, RoadClass cls, bool left) {
  const int n = cls == RoadClass::HIGHWAY ? 3 : 2;
  int ego_idx;
  if (cls == RoadClass::HIGHWAY) {
    ego_idx = left ? static_cast<int>(b.rng.uniform_int(1, 2)) : static_cast<int>(b.rng.uniform_int(0, 1));
  } else {
    ego_idx = left ? 1 : 0;
  }
  StraightSetup st = make_straight(b, cls, n, ego_idx, b.R.speed_frac_lo, b.R.speed_frac_hi);
  const int target_idx = ego_idx + (left ? -1 : +1);
  const LaneSegment& ego = b.s.road_map.lanes[st.lanes[ego_idx]];
  const LaneSegment& target = b.s.road_map.lanes[st.lanes[target_idx]];
  const double y_ego = ego.centerline.front().y;
  const double y_tgt = target.centerline.front().y;
  const double s_lc = st.s0 + st.v0 * b.rng.uniform(0.8, 1.3);
  const double l_lc = st.v0 * 3.5 * b.rng.uniform(0.9, 1.1);
  const auto route = path_y_of_x(0.0, st.length, [&](double x) {
    return y_ego + (y_tgt - y_ego) * smooth01((x - s_lc) / l_lc);
  });
  b.s.ego_history = history_on_path(Polyline(ego.centerline), st.s0, st.v0);
  b.add_ambient(st.lanes, st.ego_lane, st.lanes[target_idx], st.s0);
  b.finish(route, left ? Command::LC_LEFT : Command::LC_RIGHT, cls, kNoIntersection);
  return b.s;
}

Scene build_nudge(B& b, RoadClass cls) {
  const int n = cls == RoadClass::HIGHWAY ? 3 : (cls == RoadClass::MAINROAD ? 2 : 1);
  const int ego_idx = n > 1 ? static_cast<int>(b.rng.uniform_int(0, n - 1)) : 0;
  const double frac_lo = cls == RoadClass::SUBROAD ? 0.88 : b.R.speed_frac_lo;
  StraightSetup st = make_straight(b, cls, n, ego_idx, frac_lo, b.R.speed_frac_hi);
  LaneSegment& ego = b.s.road_map.lanes[st.ego_lane];
  if (cls == RoadClass::SUBROAD) {
    // Narrow open road: nudging may use the shoulder, so no edge lines and a
    // wider drivable band.
    ego.left_divider = DividerStyle::NONE;
    ego.right_divider = DividerStyle::NONE;
    b.s.road_map.drivable_area.back() =
        rect_poly(-10.0, st.length + 10.0, -ego.width / 2.0 - 1.5, ego.width / 2.0 + 1.5);
  }
  const double w = ego.width;
  const double y_ego = ego.centerline.front().y;
  const double intrusion = b.rng.uniform(1.25, 1.45);
  int side = b.rng.bernoulli(0.5) ? +1 : -1;
  if (n > 1) {
    if (ego_idx == 0) side = +1;          // leftmost lane: obstacle on left, nudge right
    if (ego_idx == n - 1) side = -1;      // rightmost lane: obstacle on right, nudge left
  }
  const double ramp = std::max(14.0, kPi * st.v0 * std::sqrt(1.3 / 5.0));
  const double s_obs = st.s0 + std::max(st.v0 * b.rng.uniform(2.3, 3.0), ramp + 24.0);
  const double obs_len = b.rng.uniform(3.8, 4.8);
  const double obs_wid = 1.9;
  const double y_obs = y_ego + side * (w / 2.0 - intrusion + obs_wid / 2.0);
  b.s.agents.push_back(
      static_obstacle(b.next_agent_id++, {s_obs, y_obs, 0.0}, obs_len, obs_wid));
  b.s.ego_history = history_on_path(Polyline(ego.centerline), st.s0, st.v0);
  b.finish(ego.centerline, Command::KEEP, cls, kNoIntersection);
  return b.s;
}

Scene build_merge(B& b) {
  const double w = b.jitter_w(3.75);
  const double lim = b.limit(RoadClass::HIGHWAY);
  const double length = 650.0;
  auto lanes = add_one_way(b.s.road_map, 0, RoadClass::HIGHWAY, 3, w, lim, length, w);
  const double v0 = lim * b.rng.uniform(0.68, 0.82);
  const double s0 = std::max(v0 * 2.1, 30.0) + b.rng.uniform(0.0, 10.0);
  const double s_lc = s0 + v0 * 0.5;
  const double l_lc = v0 * 2.8;
  const double ramp_end = s_lc + l_lc + b.rng.uniform(4.0, 10.0);
  const double y_ramp = w - 3.0 * w;  // right of lane 2
  // Ramp lane ends at ramp_end; through traffic continues.
  const int ramp_id =
      add_lane(b.s.road_map, 0, RoadClass::HIGHWAY, w, lim,
               {{0.0, y_ramp}, {ramp_end, y_ramp}}, DividerStyle::DASHED, DividerStyle::SOLID);
  b.s.road_map.lanes[lanes[2]].right_divider = DividerStyle::DASHED;
  b.s.road_map.drivable_area.push_back(
      rect_poly(-10.0, ramp_end + 20.0, y_ramp - w / 2.0 - 0.6, y_ramp + w / 2.0 + 0.2));
  const double y_tgt = b.s.road_map.lanes[lanes[2]].centerline.front().y;
  const auto route = path_y_of_x(0.0, length, [&](double x) {
    return y_ramp + (y_tgt - y_ramp) * smooth01((x - s_lc) / l_lc);
  });
  b.s.ego_history = history_on_path(Polyline(b.s.road_map.lanes[ramp_id].centerline), s0, v0);
  b.finish(route, Command::LC_LEFT, RoadClass::HIGHWAY, kNoIntersection);
  return b.s;
}

Scene build_exit(B& b) {
  const double w = b.jitter_w(3.75);
  const double lim = b.limit(RoadClass::HIGHWAY) * 0.92;
  const double exit_lim = b.rng.uniform(11.0, 14.0);
  const double length = 650.0;
  auto lanes = add_one_way(b.s.road_map, 0, RoadClass::HIGHWAY, 3, w, lim, length, w);
  b.s.road_map.lanes[lanes[2]].right_divider = DividerStyle::DASHED;
  const double v0 = lim * b.rng.uniform(0.78, 0.9);
  const double s0 = std::max(v0 * 2.1, 30.0) + b.rng.uniform(0.0, 10.0);
  const double x_exit = s0 + v0 * b.rng.uniform(1.6, 2.1);
  const double y_exit = w - 3.0 * w;
  add_lane(b.s.road_map, 1, RoadClass::MAINROAD, w, exit_lim,
           {{x_exit, y_exit}, {length, y_exit}}, DividerStyle::DASHED, DividerStyle::SOLID);
  b.s.road_map.drivable_area.push_back(
      rect_poly(x_exit - 5.0, length + 10.0, y_exit - w / 2.0 - 0.6, y_exit + w / 2.0 + 0.2));
  const double s_lc = x_exit + v0 * 0.4;
  const double l_lc = v0 * 2.8;
  const double y_ego = b.s.road_map.lanes[lanes[2]].centerline.front().y;
  const auto route = path_y_of_x(0.0, length, [&](double x) {
    return y_ego + (y_exit - y_ego) * smooth01((x - s_lc) / l_lc);
  });
  b.s.ego_history = history_on_path(Polyline(b.s.road_map.lanes[lanes[2]].centerline), s0, v0);
  b.finish(route, Command::LC_RIGHT, RoadClass::MAINROAD, kNoIntersection);
  return b.s;
}

Scene build_down_subroad_lc(B& b) {
  const double w_m = b.jitter_w(3.5);
  const double w_s = b.jitter_w(3.1);
  const double lim_m = b.limit(RoadClass::MAINROAD);
  const double lim_s = b.limit(RoadClass::SUBROAD);
  const double length = 420.0;
  const int main_id = add_lane(b.s.road_map, 0, RoadClass::MAINROAD, w_m, lim_m,
                               {{0.0, 0.0}, {length, 0.0}}, DividerStyle::SOLID,
                               DividerStyle::DASHED);
  const double y_sub = -(w_m + w_s) / 2.0;
  add_lane(b.s.road_map, 0, RoadClass::SUBROAD, w_s, lim_s, {{0.0, y_sub}, {length, y_sub}},
           DividerStyle::DASHED, DividerStyle::SOLID);
  b.s.road_map.drivable_area.push_back(
      rect_poly(-10.0, length + 10.0, y_sub - w_s / 2.0 - 0.6, w_m / 2.0 + 0.6));
  const double v0 = lim_m * b.rng.uniform(b.R.speed_frac_lo, b.R.speed_frac_hi);
  const double s0 = std::max(v0 * 2.1, 30.0) + b.rng.uniform(0.0, 12.0);
  const double s_lc = s0 + v0 * b.rng.uniform(0.8, 1.2);
  const double l_lc = v0 * 3.2;
  const auto route = path_y_of_x(0.0, length, [&](double x) {
    return y_sub * smooth01((x - s_lc) / l_lc);
  });
  b.s.ego_history = history_on_path(Polyline(b.s.road_map.lanes[main_id].centerline), s0, v0);
  b.finish(route, Command::LC_RIGHT, RoadClass::SUBROAD, kNoIntersection);
  return b.s;
}

Scene build_class_transition(B& b, bool upward) {
  // One continuous lane whose class (and limit) changes at x_t.
  const RoadClass from = upward ? RoadClass::SUBROAD : RoadClass::MAINROAD;
  RoadClass to;
  if (upward) {
    to = b.rng.bernoulli(0.4) ? RoadClass::HIGHWAY : RoadClass::MAINROAD;
  } else {
    to = RoadClass::SUBROAD;
  }
  const double w_from = b.jitter_w(from == RoadClass::SUBROAD ? 3.0 : 3.5);
  const double w_to = b.jitter_w(to == RoadClass::SUBROAD ? 3.0 : (to == RoadClass::HIGHWAY ? 3.75 : 3.5));
  const double lim_from = b.limit(from);
  double lim_to = b.limit(to);
  if (to == RoadClass::HIGHWAY) lim_to = b.rng.uniform(16.0, 22.0);
  const double length = 380.0;
  const double v0 = lim_from * b.rng.uniform(0.82, 0.95);
  const double s0 = std::max(v0 * 2.1, 28.0) + b.rng.uniform(0.0, 10.0);
  const double x_t = s0 + b.rng.uniform(25.0, 45.0);
  add_lane(b.s.road_map, 0, from, w_from, lim_from, {{0.0, 0.0}, {x_t, 0.0}},
           DividerStyle::SOLID, DividerStyle::SOLID);
  add_lane(b.s.road_map, 0, to, w_to, lim_to, {{x_t, 0.0}, {length, 0.0}}, DividerStyle::SOLID,
           DividerStyle::SOLID);
  const double half = std::max(w_from, w_to) / 2.0 + 0.6;
  b.s.road_map.drivable_area.push_back(rect_poly(-10.0, length + 10.0, -half, half));
  std::vector<Vec2> route = {{0.0, 0.0}, {length, 0.0}};
  b.s.ego_history =
      history_on_path(Polyline(std::vector<Vec2>{{0.0, 0.0}, {length, 0.0}}), s0, v0);
  b.finish(route, Command::KEEP, to, kNoIntersection);
  return b.s;
}

// ---------------------------------------------------------------------------
// Intersection scenarios
// ---------------------------------------------------------------------------

struct TurnGeometry {
  double w{3.5};
  double lim{12.0};
  double v0{8.0};
  double s0{18.0};
  double x_ent{40.0};
  int approach_id{-1};
  std::vector<Vec2> arc;  // from (x_ent, 0) into the departure lane
};

/// Approach lane along +x ending at x_ent, a turn arc, a departure lane, and a
/// straight continuation lane past the intersection box.
TurnGeometry make_turn_geometry(B& b, bool left, double radius, double v_lo, double v_hi,
                                double dist_lo, double dist_hi) {
  TurnGeometry g;
  g.w = b.jitter_w(3.5);
  g.lim = b.limit(RoadClass::MAINROAD);
  g.v0 = b.rng.uniform(v_lo, v_hi);
  g.s0 = std::max(g.v0 * 2.1, 13.0) + b.rng.uniform(0.0, 5.0);
  g.x_ent = g.s0 + b.rng.uniform(dist_lo, dist_hi);
  const double R = radius;
  const int sgn = left ? +1 : -1;

  g.approach_id = add_lane(b.s.road_map, 0, RoadClass::MAINROAD, g.w, g.lim,
                           {{0.0, 0.0}, {g.x_ent, 0.0}}, DividerStyle::SOLID, DividerStyle::SOLID);
  // Departure lane heading +-y.
  const double dep_len = 130.0;
  const Vec2 dep_start{g.x_ent + R, sgn * R};
  add_lane(b.s.road_map, 1, RoadClass::MAINROAD, g.w, g.lim,
           {dep_start, {dep_start.x, dep_start.y + sgn * dep_len}},
           left ? DividerStyle::NONE : DividerStyle::SOLID,
           left ? DividerStyle::SOLID : DividerStyle::NONE);
  // Continuation lane straight through.
  const double cont_start = g.x_ent + 2.0 * R + 4.0;
  add_lane(b.s.road_map, 0, RoadClass::MAINROAD, g.w, g.lim,
           {{cont_start, 0.0}, {cont_start + 90.0, 0.0}}, DividerStyle::SOLID,
           DividerStyle::SOLID);
  // Cross-road lane for map texture.
  add_lane(b.s.road_map, 2, RoadClass::MAINROAD, g.w, g.lim,
           {{g.x_ent + R, -sgn * 60.0}, {g.x_ent + R, sgn * 60.0}}, DividerStyle::NONE,
           DividerStyle::NONE);

  auto& da = b.s.road_map.drivable_area;
  da.push_back(rect_poly(-10.0, g.x_ent + 1.0, -g.w / 2.0 - 0.6, g.w / 2.0 + 0.6));
  da.push_back(rect_poly(g.x_ent - 2.0, g.x_ent + 2.0 * R + 5.0, std::min(-g.w / 2.0 - 2.0, sgn * (R + 3.0)),
                         std::max(g.w / 2.0 + 2.0, sgn * (R + 3.0))));
  da.push_back(rect_poly(dep_start.x - g.w / 2.0 - 0.6, dep_start.x + g.w / 2.0 + 0.6,
                         std::min(dep_start.y - sgn * 3.0, dep_start.y + sgn * dep_len),
                         std::max(dep_start.y - sgn * 3.0, dep_start.y + sgn * dep_len)));
  da.push_back(rect_poly(cont_start - 4.0, cont_start + 100.0, -g.w / 2.0 - 0.6, g.w / 2.0 + 0.6));
  da.push_back(rect_poly(g.x_ent + R - g.w / 2.0 - 0.6, g.x_ent + R + g.w / 2.0 + 0.6, -60.0, 60.0));

  // Quarter arc from (x_ent, 0) heading +x to the departure start.
  const Vec2 center{g.x_ent, sgn * R};
  for (int k = 0; k <= 24; ++k) {
    const double phi = (kPi / 2.0) * k / 24.0;
    g.arc.push_back({center.x + R * std::sin(phi), center.y - sgn * R * std::cos(phi)});
  }
  return g;
}

std::vector<Vec2> turn_route(const TurnGeometry& g, int sgn) {
  std::vector<Vec2> route = {{0.0, 0.0}};
  for (const Vec2& p : g.arc) route.push_back(p);
  const Vec2 last = g.arc.back();
  route.push_back({last.x, last.y + sgn * 130.0});
  return route;
}

Scene build_turn(B& b, bool left) {
  const double R = b.rng.uniform(left ? 8.0 : 6.5, left ? 11.0 : 9.0);
  TurnGeometry g = make_turn_geometry(b, left, R, 6.5, 9.0, 14.0, 20.0);
  const int sgn = left ? +1 : -1;
  const auto route = turn_route(g, sgn);
  if (b.rng.bernoulli(0.6)) {
    StopLine sl;
    sl.a = {g.x_ent - 1.0, -g.w / 2.0};
    sl.b = {g.x_ent - 1.0, g.w / 2.0};
    sl.light_id = 0;
    b.s.road_map.stop_lines.push_back(sl);
    b.s.traffic_light = {LightState::GREEN, 0, -1.0, LightState::GREEN};
  }
  if (b.rng.bernoulli(0.35)) {
    b.s.road_map.crosswalks.push_back(
        {rect_poly(g.x_ent - 5.5, g.x_ent - 2.5, -g.w / 2.0 - 2.0, g.w / 2.0 + 2.0)});
  }
  b.s.ego_history = history_on_path(
      Polyline(b.s.road_map.lanes[g.approach_id].centerline), g.s0, g.v0);
  b.finish(route, left ? Command::TURN_LEFT : Command::TURN_RIGHT, RoadClass::MAINROAD,
           g.x_ent - g.s0);
  return b.s;
}

Scene build_u_turn(B& b) {
  const double w = b.jitter_w(3.5);
  const double lim = b.limit(RoadClass::MAINROAD);
  const double R = b.rng.uniform(4.4, 5.2);
  const double length = 160.0;
  const double v0 = b.rng.uniform(5.0, 6.0);
  const double s0 = std::max(v0 * 2.1, 11.0) + b.rng.uniform(0.0, 4.0);
  const double x_u = s0 + b.rng.uniform(10.0, 15.0);
  // Boulevard: forward lane at -R, opposite lane at +R (median opening at x_u).
  const int fwd = add_lane(b.s.road_map, 0, RoadClass::MAINROAD, w, lim,
                           {{0.0, -R}, {length, -R}}, DividerStyle::DASHED, DividerStyle::SOLID);
  add_lane(b.s.road_map, 0, RoadClass::MAINROAD, w, lim, {{length, R}, {0.0, R}},
           DividerStyle::DASHED, DividerStyle::SOLID);
  b.s.road_map.drivable_area.push_back(
      rect_poly(-10.0, length + 10.0, -R - w / 2.0 - 0.6, R + w / 2.0 + 0.6));
  std::vector<Vec2> route = {{0.0, -R}};
  for (int k = 0; k <= 30; ++k) {
    const double phi = kPi * k / 30.0;  // CCW half circle around (x_u, 0)
    route.push_back({x_u + R * std::sin(phi), -R * std::cos(phi)});
  }
  route.push_back({0.0, R});
  b.s.ego_history = history_on_path(Polyline(b.s.road_map.lanes[fwd].centerline), s0, v0);
  b.finish(route, Command::U_TURN, RoadClass::MAINROAD, x_u - s0);
  return b.s;
}

Scene build_wait_turn(B& b) {
  const double R = b.rng.uniform(8.0, 10.5);
  TurnGeometry g = make_turn_geometry(b, true, R, 6.0, 8.0, 18.0, 26.0);
  const auto route = turn_route(g, +1);

  StopLine sl;
  sl.a = {g.x_ent - 1.0, -g.w / 2.0};
  sl.b = {g.x_ent - 1.0, g.w / 2.0};
  sl.light_id = 0;
  b.s.road_map.stop_lines.push_back(sl);
  const double t_green = b.rng.uniform(3.5, 5.0);
  b.s.traffic_light = {LightState::RED, 0, t_green, LightState::GREEN};

  // Queue of stopped vehicles between the ego and the stop line; they pull
  // away after the light turns green.
  const Polyline route_line(densify(route, 1.0));
  const int n_queue = b.rng.bernoulli(0.6) ? 1 : 2;
  const double lead_len = 4.5;
  double front = g.x_ent - 1.0 - b.rng.uniform(1.2, 2.0);  // first car's front bumper
  for (int i = 0; i < n_queue; ++i) {
    const double center_s = front - lead_len / 2.0;
    b.s.agents.push_back(queue_vehicle(b.next_agent_id++, route, center_s,
                                       t_green + 0.8 * (i + 1), 1.6,
                                       b.rng.uniform(4.5, 5.5)));
    front = center_s - lead_len / 2.0 - b.rng.uniform(1.6, 2.4);
  }
  const double gap = b.rng.uniform(4.0, 7.5);
  const double s0 = front - gap - kEgoFrontLen;
  // Redo geometry-dependent fields: ego sits in the queue, stopped.
  const Vec2 pos = route_line.point_at(s0);
  const Pose2 ego_pose{pos.x, pos.y, route_line.heading_at(s0)};
  b.s.ego_history = history_stopped(ego_pose);
  b.finish(route, Command::TURN_LEFT, RoadClass::MAINROAD, g.x_ent - s0);
  return b.s;
}

struct CrossRoadSetup {
  double w{3.5};
  double lim{12.0};
  double v0{10.0};
  double s0{35.0};
  double x_line{70.0};
  int lane_id{-1};
  double length{420.0};
};

/// Straight road crossing a signalized intersection; the ego lane continues
/// through it.
CrossRoadSetup make_cross_road(B& b, double v_lo, double v_hi) {
  CrossRoadSetup c;
  c.w = b.jitter_w(3.5);
  c.lim = b.limit(RoadClass::MAINROAD);
  c.v0 = b.rng.uniform(v_lo, v_hi);
  c.s0 = std::max(c.v0 * 2.1, 26.0) + b.rng.uniform(0.0, 8.0);
  c.length = 420.0;
  c.lane_id = add_lane(b.s.road_map, 0, RoadClass::MAINROAD, c.w, c.lim,
                       {{0.0, 0.0}, {c.length, 0.0}}, DividerStyle::SOLID, DividerStyle::SOLID);
  b.s.road_map.drivable_area.push_back(
      rect_poly(-10.0, c.length + 10.0, -c.w / 2.0 - 0.6, c.w / 2.0 + 0.6));
  return c;
}

void add_intersection_box(B& b, double x_line, double w) {
  const double box = 14.0;
  b.s.road_map.drivable_area.push_back(
      rect_poly(x_line, x_line + box, -w / 2.0 - 8.0, w / 2.0 + 8.0));
  // Cross lane for texture.
  add_lane(b.s.road_map, 2, RoadClass::MAINROAD, 3.5, 11.0,
           {{x_line + box / 2.0, -55.0}, {x_line + box / 2.0, 55.0}}, DividerStyle::NONE,
           DividerStyle::NONE);
  StopLine sl;
  sl.a = {x_line, -w / 2.0};
  sl.b = {x_line, w / 2.0};
  sl.light_id = 0;
  b.s.road_map.stop_lines.push_back(sl);
}

Scene build_stop_red_light(B& b) {
  CrossRoadSetup c = make_cross_road(b, 8.0, 12.0);
  const double d_stop = c.v0 * c.v0 / (2.0 * 2.6) + 0.4 * c.v0 + b.rng.uniform(1.0, 4.0);
  const double x_line = c.s0 + d_stop;
  add_intersection_box(b, x_line, c.w);
  b.s.traffic_light = {LightState::RED, 0, b.rng.uniform(6.0, 7.5), LightState::GREEN};
  const auto& lane = b.s.road_map.lanes[c.lane_id];
  b.s.ego_history = history_on_path(Polyline(lane.centerline), c.s0, c.v0);
  b.finish(lane.centerline, Command::KEEP, RoadClass::MAINROAD, d_stop);
  return b.s;
}

Scene build_start_green_light(B& b) {
  CrossRoadSetup c = make_cross_road(b, 8.0, 12.0);
  const double x_line = c.s0 + b.rng.uniform(25.0, 40.0);
  add_intersection_box(b, x_line, c.w);
  b.s.traffic_light = {LightState::GREEN, 0, -1.0, LightState::GREEN};
  const double s0 = x_line - 2.5 - kEgoFrontLen;
  const auto& lane = b.s.road_map.lanes[c.lane_id];
  const Polyline line(lane.centerline);
  const Vec2 pos = line.point_at(s0);
  b.s.ego_history = history_stopped({pos.x, pos.y, line.heading_at(s0)});
  b.finish(lane.centerline, Command::KEEP, RoadClass::MAINROAD, x_line - s0);
  return b.s;
}

Scene build_intersection_straight(B& b) {
  CrossRoadSetup c = make_cross_road(b, 8.0, 12.0);
  const double x_line = c.s0 + b.rng.uniform(20.0, 35.0);
  add_intersection_box(b, x_line, c.w);
  if (b.rng.bernoulli(0.7)) {
    b.s.traffic_light = {LightState::GREEN, 0, -1.0, LightState::GREEN};
  } else {
    b.s.road_map.stop_lines.clear();
    b.s.traffic_light = {LightState::NONE, -1, -1.0, LightState::NONE};
  }
  // A crossing vehicle that clears the box well after the ego has passed.
  if (b.rng.bernoulli(0.5)) {
    const double arrival = (x_line - c.s0) / c.v0;
    const double t_cross = arrival + b.rng.uniform(3.5, 6.0);
    const double v_cross = 8.0;
    const auto& cross_lane = b.s.road_map.lanes.back();
    // Station of the box center along the cross lane (it spans -55..55).
    const double s_center = 55.0;
    b.s.agents.push_back(const_vehicle(b.next_agent_id++, cross_lane.centerline,
                                       s_center - v_cross * t_cross, v_cross));
  }
  const auto& lane = b.s.road_map.lanes[c.lane_id];
  b.s.ego_history = history_on_path(Polyline(lane.centerline), c.s0, c.v0);
  b.finish(lane.centerline, Command::KEEP, RoadClass::MAINROAD, x_line - c.s0);
  return b.s;
}

Scene build_yield_pedestrian(B& b) {
  CrossRoadSetup c = make_cross_road(b, 7.0, 10.0);
  const double d_cw = std::max(c.v0 * c.v0 / (2.0 * 2.4) + 0.4 * c.v0 + 3.0,
                               b.rng.uniform(15.0, 22.0));
  const double x_cw = c.s0 + d_cw;
  b.s.road_map.crosswalks.push_back(
      {rect_poly(x_cw - 1.5, x_cw + 1.5, -c.w / 2.0 - 2.0, c.w / 2.0 + 2.0)});
  const int side = b.rng.bernoulli(0.5) ? +1 : -1;
  const double y0 = side * (c.w / 2.0 + 1.2);
  const double walk = 2.0 * std::abs(y0) + 1.5;
  b.s.agents.push_back(pedestrian(b.next_agent_id++, {x_cw, y0}, {0.0, -static_cast<double>(side)},
                                  1.25, b.rng.uniform(0.0, 0.7), walk));
  const auto& lane = b.s.road_map.lanes[c.lane_id];
  b.s.ego_history = history_on_path(Polyline(lane.centerline), c.s0, c.v0);
  b.finish(lane.centerline, Command::KEEP, RoadClass::MAINROAD, kNoIntersection);
  return b.s;
}

Scene build_scene(ScenarioType type, std::uint64_t seed, const GenRanges& R) {
  B b(seed, R);
  switch (type) {
    case ScenarioType::HIGHWAY_CRUISE: return build_cruise(b, RoadClass::HIGHWAY);
    case ScenarioType::HIGHWAY_LC_LEFT: return build_lane_change(b, RoadClass::HIGHWAY, true);
    case ScenarioType::HIGHWAY_LC_RIGHT: return build_lane_change(b, RoadClass::HIGHWAY, false);
    case ScenarioType::HIGHWAY_NUDGE_OBS: return build_nudge(b, RoadClass::HIGHWAY);
    case ScenarioType::HIGHWAY_MERGE: return build_merge(b);
    case ScenarioType::HIGHWAY_EXIT: return build_exit(b);
    case ScenarioType::MAINROAD_CRUISE: return build_cruise(b, RoadClass::MAINROAD);
    case ScenarioType::MAINROAD_LC_LEFT: return build_lane_change(b, RoadClass::MAINROAD, true);
    case ScenarioType::MAINROAD_LC_RIGHT: return build_lane_change(b, RoadClass::MAINROAD, false);
    case ScenarioType::MAINROAD_NUDGE_OBS: return build_nudge(b, RoadClass::MAINROAD);
    case ScenarioType::SUBROAD_CRUISE: return build_cruise(b, RoadClass::SUBROAD);
    case ScenarioType::SUBROAD_NUDGE_OBS: return build_nudge(b, RoadClass::SUBROAD);
    case ScenarioType::DOWN_SUBROAD_LC: return build_down_subroad_lc(b);
    case ScenarioType::SUBROAD_TO_MAINROAD_HIGHWAY: return build_class_transition(b, true);
    case ScenarioType::MAINROAD_TO_SUBROAD: return build_class_transition(b, false);
    case ScenarioType::TURN_LEFT: return build_turn(b, true);
    case ScenarioType::TURN_RIGHT: return build_turn(b, false);
    case ScenarioType::U_TURN: return build_u_turn(b);
    case ScenarioType::WAIT_TURN: return build_wait_turn(b);
    case ScenarioType::STOP_RED_LIGHT: return build_stop_red_light(b);
    case ScenarioType::START_GREEN_LIGHT: return build_start_green_light(b);
    case ScenarioType::YIELD_PEDESTRIAN: return build_yield_pedestrian(b);
    case ScenarioType::INTERSECTION_STRAIGHT: return build_intersection_straight(b);
    default:
      throw std::invalid_argument("cannot generate scenes of type " + to_string(type));
  }
}

char hex_digit(unsigned v) { return v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10); }

std::string seed_hex(std::uint64_t seed) {
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex_digit(seed & 0xF);
    seed >>= 4;
  }
  return out;
}

}  // namespace

Scene generate_scene(ScenarioType type, std::uint64_t seed, const GenRanges& ranges) {
  for (int attempt = 0; attempt < 24; ++attempt) {
    const std::uint64_t sub = attempt == 0 ? seed : seed_combine(seed, 0xa17e5ceULL, attempt);
    Scene scene = build_scene(type, sub, ranges);
    scene.scenario_label = type;
    scene.seed = seed;
    scene.scene_id = to_string(type) + "-" + seed_hex(seed);
    Demonstration demo{scene, expert_plan(scene)};
    if (demo.expert_future.size() != static_cast<std::size_t>(kPlanWaypoints)) continue;
    try {
      validate_demonstration(demo);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (classify(scene, demo.expert_future, true) != type) continue;
    return scene;
  }
  throw std::runtime_error("generate_scene: no consistent sample for " + to_string(type) +
                           " seed " + std::to_string(seed));
}

namespace {

bool expert_gate(const Scene& scene) {
  const SimConfig sim_cfg;
  const SimTrace trace = rollout(make_expert_policy(scene), scene, sim_cfg);
  if (trace.truncated) return false;
  const MetricScores scores = score_all(trace, scene, trace, sim_cfg);
  return scores.safety >= 1.0 - 1e-9 && scores.total >= 0.9;
}

}  // namespace

std::vector<Demonstration> generate_demos(const GenSpec& spec, GenReport* report) {
  spec.validate();
  struct Job {
    ScenarioType type;
    std::int64_t index;
    std::uint64_t record_seed;
  };
  std::vector<Job> jobs;
  for (ScenarioType t : all_scenario_types()) {
    auto it = spec.counts.find(t);
    if (it == spec.counts.end()) continue;
    for (std::int64_t i = 0; i < it->second; ++i) {
      jobs.push_back({t, i, seed_combine(spec.seed, static_cast<std::uint64_t>(t), i)});
    }
  }

  std::vector<Demonstration> demos(jobs.size());
  std::vector<int> rejects(jobs.size(), 0);
  std::vector<std::string> errors(jobs.size());

#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(jobs.size()); ++j) {
    const Job& job = jobs[static_cast<std::size_t>(j)];
    try {
      for (int retry = 0;; ++retry) {
        if (retry > 40) {
          throw std::runtime_error("rejection rate too high for " + to_string(job.type));
        }
        const std::uint64_t scene_seed =
            retry == 0 ? job.record_seed : seed_combine(job.record_seed, 0x5e7ec7ULL, retry);
        Scene scene = generate_scene(job.type, scene_seed, spec.ranges);
        Demonstration demo{scene, expert_plan(scene)};
        if (!expert_gate(scene)) {
          ++rejects[static_cast<std::size_t>(j)];
          continue;
        }
        demos[static_cast<std::size_t>(j)] = std::move(demo);
        break;
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(j)] = e.what();
    }
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!errors[j].empty()) {
      throw std::runtime_error("generation failed for " + to_string(jobs[j].type) + " index " +
                               std::to_string(jobs[j].index) + ": " + errors[j]);
    }
  }

  std::map<ScenarioType, std::int64_t> rej_by_type, count_by_type;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    rej_by_type[jobs[j].type] += rejects[j];
    ++count_by_type[jobs[j].type];
  }
  for (const auto& [t, total] : count_by_type) {
    const std::int64_t rej = rej_by_type[t];
    if (total >= 8 && rej > total) {  // > 50% rejection rate
      throw std::runtime_error("generation aborted: rejection rate for " + to_string(t) + " is " +
                               std::to_string(rej) + "/" + std::to_string(rej + total));
    }
  }
  if (report) {
    report->counts = count_by_type;
    report->rejected = rej_by_type;
  }
  return demos;
}

GenReport generate_dataset(const GenSpec& spec, const std::string& dataset_path) {
  GenReport report;
  const std::vector<Demonstration> demos = generate_demos(spec, &report);
  write_dataset(demos, dataset_path);
  DatasetManifest manifest;
  manifest.seed = spec.seed;
  for (const auto& [t, c] : report.counts) manifest.counts[to_string(t)] = c;
  write_manifest(manifest, manifest_path_for(dataset_path));
  return report;
}

namespace {
// Long-tail weights per mille, in enum order. DOWN_SUBROAD_LC and
// SUBROAD_TO_MAINROAD_HIGHWAY sit in the 1-2% tail.
constexpr std::array<int, kNumScenarioTypes> kLongtailWeights = {
    95,   // HIGHWAY_CRUISE
    35,   // HIGHWAY_LC_LEFT
    35,   // HIGHWAY_LC_RIGHT
    15,   // HIGHWAY_NUDGE_OBS
    25,   // HIGHWAY_MERGE
    25,   // HIGHWAY_EXIT
    125,  // MAINROAD_CRUISE
    50,   // MAINROAD_LC_LEFT
    50,   // MAINROAD_LC_RIGHT
    20,   // MAINROAD_NUDGE_OBS
    70,   // SUBROAD_CRUISE
    15,   // SUBROAD_NUDGE_OBS
    15,   // DOWN_SUBROAD_LC
    15,   // SUBROAD_TO_MAINROAD_HIGHWAY
    20,   // MAINROAD_TO_SUBROAD
    70,   // TURN_LEFT
    70,   // TURN_RIGHT
    20,   // U_TURN
    15,   // WAIT_TURN
    70,   // STOP_RED_LIGHT
    50,   // START_GREEN_LIGHT
    30,   // YIELD_PEDESTRIAN
    85,   // INTERSECTION_STRAIGHT
};
}  // namespace

std::map<ScenarioType, std::int64_t> apportion_counts(
    const std::map<ScenarioType, std::int64_t>& weights, std::int64_t total) {
  std::int64_t wsum = 0;
  for (const auto& [_, w] : weights) wsum += w;
  std::map<ScenarioType, std::int64_t> out;
  std::vector<std::pair<ScenarioType, double>> fracs;
  std::int64_t assigned = 0;
  for (const auto& [t, w] : weights) {
    const double quota =
        static_cast<double>(w) * static_cast<double>(total) / static_cast<double>(wsum);
    const std::int64_t base = static_cast<std::int64_t>(std::floor(quota + 1e-9));
    out[t] = base;
    assigned += base;
    fracs.emplace_back(t, quota - static_cast<double>(base));
  }
  std::stable_sort(fracs.begin(), fracs.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::int64_t remaining = total - assigned;
  for (const auto& [t, _] : fracs) {
    if (remaining <= 0) break;
    ++out[t];
    --remaining;
  }
  return out;
}

std::map<ScenarioType, std::int64_t> longtail_weights() {
  static_assert(kLongtailWeights.size() == kNumScenarioTypes);
  std::map<ScenarioType, std::int64_t> weights;
  int i = 0;
  for (ScenarioType t : all_scenario_types()) weights[t] = kLongtailWeights[i++];
  return weights;
}

std::map<ScenarioType, std::int64_t> longtail_counts(std::int64_t total) {
  return apportion_counts(longtail_weights(), total);
}

std::map<ScenarioType, std::int64_t> balanced_counts(std::int64_t total) {
  std::map<ScenarioType, std::int64_t> out;
  const std::int64_t base = total / kNumScenarioTypes;
  std::int64_t rem = total - base * kNumScenarioTypes;
  for (ScenarioType t : all_scenario_types()) {
    out[t] = base + (rem > 0 ? 1 : 0);
    if (rem > 0) --rem;
  }
  return out;
}

}  // namespace drivelab
