#include "drivelab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace drivelab {

std::string to_string(EventType e) {
  switch (e) {
    case EventType::COLLISION: return "COLLISION";
    case EventType::OFF_DRIVABLE: return "OFF_DRIVABLE";
    case EventType::SOLID_LINE_CROSS: return "SOLID_LINE_CROSS";
    case EventType::RED_LIGHT_RUN: return "RED_LIGHT_RUN";
    case EventType::PEDESTRIAN_NOT_YIELDED: return "PEDESTRIAN_NOT_YIELDED";
    case EventType::WRONG_WAY: return "WRONG_WAY";
    case EventType::SPEEDING: return "SPEEDING";
    case EventType::LANE_CHANGE: return "LANE_CHANGE";
    case EventType::DETOUR: return "DETOUR";
    case EventType::GOAL_REACHED: return "GOAL_REACHED";
    case EventType::POLICY_ERROR: return "POLICY_ERROR";
  }
  return "?";
}

bool SimTrace::has_event(EventType e) const {
  for (const SimEvent& ev : events) {
    if (ev.type == e) return true;
  }
  return false;
}

namespace {

/// Offset a lane centerline to one of its edges (+1 left, -1 right).
std::vector<Vec2> lane_edge(const LaneSegment& lane, int side) {
  std::vector<Vec2> out;
  const auto& c = lane.centerline;
  out.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec2 d = (i + 1 < c.size() ? c[i + 1] - c[i] : c[i] - c[i - 1]);
    const double n = d.norm();
    const Vec2 normal = n > 1e-12 ? Vec2{-d.y / n, d.x / n} : Vec2{0.0, 1.0};
    out.push_back(c[i] + normal * (side * lane.width / 2.0));
  }
  return out;
}

bool footprint_in_drivable(const RoadMap& map, const Pose2& pose) {
  OrientedBox box = ego_box(pose);
  box.half_len -= 0.05;
  box.half_wid -= 0.05;
  if (!map.in_drivable(box.center)) return false;
  for (const Vec2& c : box.corners()) {
    if (!map.in_drivable(c)) return false;
  }
  return true;
}

struct LaneMatch {
  int lane_index{-1};
  double station{0.0};
  double lateral{0.0};
};

/// Nearest lane by position; `aligned` additionally requires the ego heading
/// to roughly follow the lane direction.
LaneMatch match_lane(const std::vector<Polyline>& lanes, const RoadMap& map, const Pose2& pose,
                     bool aligned) {
  LaneMatch best;
  double best_d = 1e18;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const auto proj = lanes[i].project(pose.position());
    if (std::abs(proj.lateral) > map.lanes[i].width / 2.0 + 0.3) continue;
    if (proj.station <= 0.0 || proj.station >= lanes[i].length()) continue;
    if (aligned) {
      const double dh = std::abs(normalize_angle(pose.heading - lanes[i].heading_at(proj.station)));
      if (dh > 1.0) continue;
    }
    if (proj.dist < best_d) {
      best_d = proj.dist;
      best = {static_cast<int>(i), proj.station, proj.lateral};
    }
  }
  return best;
}

struct PlanTracker {
  Pose2 origin;       // ego pose at plan time
  double t_plan{0.0};
  std::vector<Vec2> pts;   // world positions, pts[0] = origin
  std::vector<double> ts;  // timestamps relative to t_plan, ts[0] = 0

  Vec2 position_at(double tau) const {
    if (tau <= 0.0) return pts.front();
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (tau <= ts[i]) {
        const double span = ts[i] - ts[i - 1];
        const double f = span > 1e-9 ? (tau - ts[i - 1]) / span : 0.0;
        return pts[i - 1] + (pts[i] - pts[i - 1]) * f;
      }
    }
    return pts.back();
  }
};

bool plan_is_finite(const Trajectory& plan) {
  if (plan.size() != static_cast<std::size_t>(kPlanWaypoints)) return false;
  for (const Waypoint& w : plan.waypoints) {
    if (!std::isfinite(w.pose.x) || !std::isfinite(w.pose.y) || !std::isfinite(w.speed)) {
      return false;
    }
  }
  return true;
}

}  // namespace

SimTrace rollout(const PolicyFn& policy, const Scene& scene, const SimConfig& config) {
  SimTrace trace;
  const int n_steps = static_cast<int>(std::round(config.horizon / config.dt));
  const RoadMap& map = scene.road_map;

  std::vector<Polyline> lane_lines;
  lane_lines.reserve(map.lanes.size());
  for (const LaneSegment& l : map.lanes) lane_lines.emplace_back(l.centerline);

  // Solid dividers as world polylines.
  std::vector<std::vector<Vec2>> solid_lines;
  for (const LaneSegment& l : map.lanes) {
    if (l.left_divider == DividerStyle::SOLID) solid_lines.push_back(lane_edge(l, +1));
    if (l.right_divider == DividerStyle::SOLID) solid_lines.push_back(lane_edge(l, -1));
  }

  const Polyline route(scene.nav.route);

  EgoStepState st;
  st.t = 0.0;
  st.pose = scene.start_pose();
  st.speed = scene.start_speed();
  trace.states.push_back(st);

  PlanTracker tracker;
  std::set<int> collided;
  int current_lane = match_lane(lane_lines, map, st.pose, true).lane_index;
  int lane_change_counter = 0;
  int candidate_lane = current_lane;
  int wrong_way_counter = 0;
  bool wrong_way_flagged = false;
  int speeding_counter = 0;
  bool speeding_flagged = false;
  bool goal_flagged = false;
  double max_station = route.project(st.pose.position()).station;
  double station_hint = max_station;
  bool detour_armed = true;
  std::set<std::size_t> ped_crosswalks;

  // History ring for policy inputs.
  std::vector<Waypoint> history(scene.ego_history.waypoints.begin(),
                                scene.ego_history.waypoints.end());

  auto detect_events = [&](int step, const EgoStepState& prev, const EgoStepState& cur) {
    // Collisions with replayed agents.
    const OrientedBox ego = ego_box(cur.pose);
    for (const AgentTrack& agent : scene.agents) {
      if (collided.count(agent.id)) continue;
      if (!ego.overlaps(agent.box_at(cur.t))) continue;
      collided.insert(agent.id);
      const Vec2 rel = cur.pose.to_local(agent.pose_at(cur.t).position());
      const bool rear_strike =
          rel.x < -0.3 * kEgoLength && agent.speed_at(cur.t) > cur.speed + 0.3;
      SimEvent ev{EventType::COLLISION, step, false, false};
      ev.at_fault = cur.speed > 0.3 && !rear_strike;
      trace.events.push_back(ev);
    }

    if (!footprint_in_drivable(map, cur.pose)) {
      trace.events.push_back({EventType::OFF_DRIVABLE, step, false, false});
    }

    const Vec2 p0 = prev.pose.position();
    const Vec2 p1 = cur.pose.position();
    for (const auto& line : solid_lines) {
      for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        if (segments_intersect(p0, p1, line[i], line[i + 1])) {
          trace.events.push_back({EventType::SOLID_LINE_CROSS, step, false, false});
          break;
        }
      }
    }

    // Only the stop line linked to the scene's light can be run.
    const int linked = scene.traffic_light.stop_line_id;
    if (linked >= 0 && linked < static_cast<int>(map.stop_lines.size()) &&
        scene.traffic_light.state_at(cur.t) == LightState::RED) {
      const StopLine& sl = map.stop_lines[linked];
      if (segments_intersect(p0, p1, sl.a, sl.b)) {
        trace.events.push_back({EventType::RED_LIGHT_RUN, step, false, false});
      }
    }

    for (std::size_t ci = 0; ci < map.crosswalks.size(); ++ci) {
      if (ped_crosswalks.count(ci)) continue;
      const auto& poly = map.crosswalks[ci].polygon;
      bool ego_in = point_in_polygon(ego.center, poly);
      if (!ego_in) {
        for (const Vec2& c : ego.corners()) {
          if (point_in_polygon(c, poly)) {
            ego_in = true;
            break;
          }
        }
      }
      if (!ego_in) continue;
      for (const AgentTrack& agent : scene.agents) {
        if (agent.cls != AgentClass::PEDESTRIAN) continue;
        if (point_in_polygon(agent.pose_at(cur.t).position(), poly)) {
          trace.events.push_back({EventType::PEDESTRIAN_NOT_YIELDED, step, false, false});
          ped_crosswalks.insert(ci);
          break;
        }
      }
    }

    // Wrong way: sustained anti-alignment with the nearest lane.
    const LaneMatch pos_match = match_lane(lane_lines, map, cur.pose, false);
    if (pos_match.lane_index >= 0 && cur.speed > 1.0) {
      const double lane_heading = lane_lines[pos_match.lane_index].heading_at(pos_match.station);
      if (std::abs(normalize_angle(cur.pose.heading - lane_heading)) > 2.1) {
        if (++wrong_way_counter >= 10 && !wrong_way_flagged) {
          trace.events.push_back({EventType::WRONG_WAY, step, false, false});
          wrong_way_flagged = true;
        }
      } else {
        wrong_way_counter = 0;
      }
    } else {
      wrong_way_counter = 0;
    }

    if (pos_match.lane_index >= 0) {
      const double limit = map.lanes[pos_match.lane_index].speed_limit;
      if (cur.speed > limit * 1.05 + 0.3) {
        if (++speeding_counter >= 5 && !speeding_flagged) {
          trace.events.push_back({EventType::SPEEDING, step, false, false});
          speeding_flagged = true;
        }
      } else {
        speeding_counter = 0;
      }
    }

    // Lane change: nearest aligned lane differs from the current one for 0.8 s.
    const LaneMatch lane_now = match_lane(lane_lines, map, cur.pose, true);
    if (lane_now.lane_index >= 0 && current_lane >= 0 && lane_now.lane_index != current_lane) {
      if (lane_now.lane_index == candidate_lane) {
        ++lane_change_counter;
      } else {
        candidate_lane = lane_now.lane_index;
        lane_change_counter = 1;
      }
      if (lane_change_counter >= 8 &&
          map.lanes[candidate_lane].road_id == map.lanes[current_lane].road_id) {
        const auto route_proj = lane_lines[candidate_lane].project(
            route.point_at(std::min(max_station, route.length())));
        SimEvent ev{EventType::LANE_CHANGE, step, false, false};
        ev.valid = std::abs(route_proj.lateral) < map.lanes[candidate_lane].width / 2.0 ||
                   scene.nav.command == Command::LC_LEFT ||
                   scene.nav.command == Command::LC_RIGHT;
        trace.events.push_back(ev);
        current_lane = candidate_lane;
        lane_change_counter = 0;
      } else if (lane_change_counter >= 8) {
        current_lane = candidate_lane;  // crossing roads (e.g. turns), no event
        lane_change_counter = 0;
      }
    } else if (lane_now.lane_index == current_lane) {
      lane_change_counter = 0;
    }

    const auto proj = route.project_near(cur.pose.position(), station_hint, 30.0);
    station_hint = proj.station;
    if (proj.station > max_station) {
      max_station = proj.station;
      detour_armed = true;
    } else if (detour_armed && proj.station < max_station - 3.0) {
      trace.events.push_back({EventType::DETOUR, step, false, false});
      detour_armed = false;
    }

    if (!goal_flagged &&
        (proj.station >= route.length() - 3.0 ||
         dist(cur.pose.position(), route.points().back()) < 4.0)) {
      trace.events.push_back({EventType::GOAL_REACHED, step, false, false});
      goal_flagged = true;
    }
  };

  detect_events(0, st, st);

  for (int step = 0; step < n_steps; ++step) {
    const double t_now = step * config.dt;
    if (step % config.replan_interval == 0) {
      PlanInput input;
      input.scene = &scene;
      input.t_now = t_now;
      input.ego_pose = st.pose;
      input.ego_speed = st.speed;
      input.history.sample_rate_hz = kHistoryRateHz;
      input.history.waypoints = history;
      Trajectory plan;
      bool failed = false;
      try {
        plan = policy(input);
      } catch (const std::exception&) {
        failed = true;
      }
      if (failed || !plan_is_finite(plan)) {
        trace.events.push_back({EventType::POLICY_ERROR, step, false, false});
        trace.truncated = true;
        break;
      }
      tracker.origin = st.pose;
      tracker.t_plan = t_now;
      tracker.pts.assign(1, st.pose.position());
      tracker.ts.assign(1, 0.0);
      for (const Waypoint& w : plan.waypoints) {
        tracker.pts.push_back(tracker.origin.to_world(w.pose.position()));
        tracker.ts.push_back(w.t);
      }
    }

    // Track the plan with acceleration and yaw-rate clamps.
    const double tau_next = t_now + config.dt - tracker.t_plan;
    const Vec2 target = tracker.position_at(tau_next);
    const Vec2 dp = target - st.pose.position();
    const double v_des = dp.norm() / config.dt;
    double accel = std::clamp((v_des - st.speed) / config.dt, -config.max_accel, config.max_accel);
    double v_new = std::max(0.0, st.speed + accel * config.dt);
    accel = (v_new - st.speed) / config.dt;
    double heading_new = st.pose.heading;
    double yaw_rate = 0.0;
    if (v_new > 0.05 && dp.norm() > 1e-6) {
      const double heading_des = std::atan2(dp.y, dp.x);
      const double dpsi = normalize_angle(heading_des - st.pose.heading);
      yaw_rate = std::clamp(dpsi / config.dt, -config.max_yaw_rate, config.max_yaw_rate);
      heading_new = normalize_angle(st.pose.heading + yaw_rate * config.dt);
    }
    EgoStepState next;
    next.t = t_now + config.dt;
    next.speed = v_new;
    next.accel = accel;
    next.yaw_rate = yaw_rate;
    next.pose.heading = heading_new;
    const Vec2 pos_new =
        st.pose.position() + Vec2{std::cos(heading_new), std::sin(heading_new)} * (v_new * config.dt);
    next.pose.x = pos_new.x;
    next.pose.y = pos_new.y;

    trace.states.push_back(next);
    detect_events(step + 1, st, next);

    history.erase(history.begin());
    history.push_back({next.t, next.pose, next.speed});
    st = next;
  }

  return trace;
}

double score_safety(const SimTrace& trace, const Scene& scene, const SimConfig& config) {
  for (const SimEvent& ev : trace.events) {
    if (ev.type == EventType::COLLISION && ev.at_fault) return 0.0;
  }
  if (trace.states.empty()) return 0.0;
  int off = 0;
  for (const EgoStepState& st : trace.states) {
    if (!footprint_in_drivable(scene.road_map, st.pose)) ++off;
  }
  const double frac = static_cast<double>(off) / static_cast<double>(trace.states.size());
  return 1.0 - std::min(1.0, frac / config.penalties.off_drivable_cap);
}

double score_comfort(const SimTrace& trace, const SimConfig& config) {
  const ComfortThresholds& th = config.comfort;
  bool lat_ok = true, lon_ok = true, yaw_ok = true, jerk_ok = true, radius_ok = true;
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const EgoStepState& st = trace.states[i];
    if (std::abs(st.speed * st.yaw_rate) > th.max_abs_lat_accel) lat_ok = false;
    if (st.accel < th.min_lon_accel || st.accel > th.max_lon_accel) lon_ok = false;
    if (std::abs(st.yaw_rate) > th.max_abs_yaw_rate) yaw_ok = false;
    if (i > 0) {
      const double jerk = (st.accel - trace.states[i - 1].accel) / config.dt;
      if (std::abs(jerk) > th.max_abs_jerk) jerk_ok = false;
    }
    if (st.speed > th.radius_speed && std::abs(st.yaw_rate) > 1e-3) {
      if (st.speed / std::abs(st.yaw_rate) < th.min_turn_radius) radius_ok = false;
    }
  }
  const int passed = lat_ok + lon_ok + yaw_ok + jerk_ok + radius_ok;
  return passed / 5.0;
}

double score_rule(const SimTrace& trace, const Scene& scene, const SimConfig& config) {
  (void)scene;
  std::set<EventType> classes;
  for (const SimEvent& ev : trace.events) {
    switch (ev.type) {
      case EventType::SOLID_LINE_CROSS:
      case EventType::RED_LIGHT_RUN:
      case EventType::PEDESTRIAN_NOT_YIELDED:
      case EventType::WRONG_WAY:
      case EventType::SPEEDING:
        classes.insert(ev.type);
        break;
      default:
        break;
    }
  }
  return std::max(0.0, 1.0 - config.penalties.rule_deduction * static_cast<double>(classes.size()));
}

std::pair<double, double> route_progress(const SimTrace& trace, const Scene& scene) {
  const Polyline route(scene.nav.route);
  if (trace.states.empty() || route.empty()) return {0.0, 0.0};
  double hint = route.project(trace.states.front().pose.position()).station;
  const double s0 = hint;
  double max_station = hint;
  double final_station = hint;
  for (const EgoStepState& st : trace.states) {
    const auto proj = route.project_near(st.pose.position(), hint, 30.0);
    hint = proj.station;
    final_station = proj.station;
    max_station = std::max(max_station, proj.station);
  }
  return {max_station - s0, final_station};
}

double score_efficiency(const SimTrace& trace, const Scene& scene, double expert_progress,
                        const SimConfig& config) {
  const auto [progress, _] = route_progress(trace, scene);
  double ratio = 1.0;
  if (expert_progress > 0.5) {
    ratio = std::clamp(progress / expert_progress, 0.0, 1.0);
  }
  int invalid_lc = 0, detours = 0;
  for (const SimEvent& ev : trace.events) {
    if (ev.type == EventType::LANE_CHANGE && !ev.valid) ++invalid_lc;
    if (ev.type == EventType::DETOUR) ++detours;
  }
  return ratio * std::pow(config.penalties.efficiency_factor, invalid_lc + detours);
}

double score_navigation(const SimTrace& trace, const Scene& scene, double expert_final_station,
                        const SimConfig& config) {
  if (trace.states.empty()) return 0.0;
  const Polyline route(scene.nav.route);
  const auto [_, final_station] = route_progress(trace, scene);
  const EgoStepState& last = trace.states.back();
  const auto proj = route.project_near(last.pose.position(), final_station, 30.0);
  const bool reached = final_station >= std::max(3.0, 0.5 * expert_final_station);
  if (!reached) return 0.0;
  const double align =
      std::abs(normalize_angle(last.pose.heading - route.heading_at(proj.station)));
  const bool executed = std::abs(proj.lateral) <= 2.0 && align <= 0.79;
  return executed ? 1.0 : config.penalties.navigation_partial;
}

double total_score(const MetricScores& scores) {
  const double comps[5] = {scores.safety, scores.comfort, scores.rule, scores.efficiency,
                           scores.navigation};
  for (double c : comps) {
    if (!(c >= -1e-9 && c <= 1.0 + 1e-9)) {
      throw std::invalid_argument("total_score: component outside [0, 1]");
    }
  }
  return 0.25 * scores.safety + 0.15 * scores.comfort + 0.2 * scores.rule +
         0.25 * scores.efficiency + 0.15 * scores.navigation;
}

MetricScores score_all(const SimTrace& trace, const Scene& scene, const SimTrace& expert_trace,
                       const SimConfig& config) {
  const auto [expert_progress, expert_final] = route_progress(expert_trace, scene);
  MetricScores s;
  s.safety = score_safety(trace, scene, config);
  s.comfort = score_comfort(trace, config);
  s.rule = score_rule(trace, scene, config);
  s.efficiency = score_efficiency(trace, scene, expert_progress, config);
  s.navigation = score_navigation(trace, scene, expert_final, config);
  s.total = total_score(s);
  return s;
}

void write_trace(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char buf[256];
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const EgoStepState& st = trace.states[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", i, st.t, st.pose.x,
                  st.pose.y, st.pose.heading, st.speed, st.accel, st.yaw_rate);
    out << buf;
    for (const SimEvent& ev : trace.events) {
      if (ev.step == static_cast<int>(i)) {
        out << ',' << to_string(ev.type);
        if (ev.type == EventType::COLLISION) out << (ev.at_fault ? ":at_fault" : ":no_fault");
        if (ev.type == EventType::LANE_CHANGE) out << (ev.valid ? ":valid" : ":invalid");
      }
    }
    out << '\n';
  }
}

}  // namespace drivelab
