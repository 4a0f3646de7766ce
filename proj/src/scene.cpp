#include "drivelab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace drivelab {

const std::vector<ScenarioType>& all_scenario_types() {
  static const std::vector<ScenarioType> kTypes = {
      ScenarioType::HIGHWAY_CRUISE,
      ScenarioType::HIGHWAY_LC_LEFT,
      ScenarioType::HIGHWAY_LC_RIGHT,
      ScenarioType::HIGHWAY_NUDGE_OBS,
      ScenarioType::HIGHWAY_MERGE,
      ScenarioType::HIGHWAY_EXIT,
      ScenarioType::MAINROAD_CRUISE,
      ScenarioType::MAINROAD_LC_LEFT,
      ScenarioType::MAINROAD_LC_RIGHT,
      ScenarioType::MAINROAD_NUDGE_OBS,
      ScenarioType::SUBROAD_CRUISE,
      ScenarioType::SUBROAD_NUDGE_OBS,
      ScenarioType::DOWN_SUBROAD_LC,
      ScenarioType::SUBROAD_TO_MAINROAD_HIGHWAY,
      ScenarioType::MAINROAD_TO_SUBROAD,
      ScenarioType::TURN_LEFT,
      ScenarioType::TURN_RIGHT,
      ScenarioType::U_TURN,
      ScenarioType::WAIT_TURN,
      ScenarioType::STOP_RED_LIGHT,
      ScenarioType::START_GREEN_LIGHT,
      ScenarioType::YIELD_PEDESTRIAN,
      ScenarioType::INTERSECTION_STRAIGHT,
  };
  return kTypes;
}

namespace {
const char* scenario_names[] = {
    "HIGHWAY_CRUISE",          "HIGHWAY_LC_LEFT",
    "HIGHWAY_LC_RIGHT",        "HIGHWAY_NUDGE_OBS",
    "HIGHWAY_MERGE",           "HIGHWAY_EXIT",
    "MAINROAD_CRUISE",         "MAINROAD_LC_LEFT",
    "MAINROAD_LC_RIGHT",       "MAINROAD_NUDGE_OBS",
    "SUBROAD_CRUISE",          "SUBROAD_NUDGE_OBS",
    "DOWN_SUBROAD_LC",         "SUBROAD_TO_MAINROAD_HIGHWAY",
    "MAINROAD_TO_SUBROAD",     "TURN_LEFT",
    "TURN_RIGHT",              "U_TURN",
    "WAIT_TURN",               "STOP_RED_LIGHT",
    "START_GREEN_LIGHT",       "YIELD_PEDESTRIAN",
    "INTERSECTION_STRAIGHT",   "AMBIGUOUS",
};

template <typename T>
T enum_from_string(const std::string& s, const char* const* names, int count, const char* what) {
  for (int i = 0; i < count; ++i) {
    if (s == names[i]) return static_cast<T>(i);
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + s);
}
}  // namespace

std::string to_string(ScenarioType t) { return scenario_names[static_cast<int>(t)]; }

ScenarioType scenario_type_from_string(const std::string& s) {
  return enum_from_string<ScenarioType>(s, scenario_names, kNumScenarioTypes + 1, "scenario type");
}

namespace {
const char* road_class_names[] = {"HIGHWAY", "MAINROAD", "SUBROAD"};
const char* divider_names[] = {"SOLID", "DASHED", "NONE"};
const char* agent_class_names[] = {"VEHICLE", "PEDESTRIAN", "STATIC_OBSTACLE"};
const char* command_names[] = {"KEEP", "TURN_LEFT", "TURN_RIGHT", "U_TURN", "LC_LEFT", "LC_RIGHT"};
const char* light_names[] = {"RED", "GREEN", "NONE"};
}  // namespace

std::string to_string(RoadClass c) { return road_class_names[static_cast<int>(c)]; }
std::string to_string(DividerStyle s) { return divider_names[static_cast<int>(s)]; }
std::string to_string(AgentClass c) { return agent_class_names[static_cast<int>(c)]; }
std::string to_string(Command c) { return command_names[static_cast<int>(c)]; }
std::string to_string(LightState s) { return light_names[static_cast<int>(s)]; }

RoadClass road_class_from_string(const std::string& s) {
  return enum_from_string<RoadClass>(s, road_class_names, 3, "road class");
}
DividerStyle divider_style_from_string(const std::string& s) {
  return enum_from_string<DividerStyle>(s, divider_names, 3, "divider style");
}
AgentClass agent_class_from_string(const std::string& s) {
  return enum_from_string<AgentClass>(s, agent_class_names, 3, "agent class");
}
Command command_from_string(const std::string& s) {
  return enum_from_string<Command>(s, command_names, 6, "command");
}
LightState light_state_from_string(const std::string& s) {
  return enum_from_string<LightState>(s, light_names, 3, "light state");
}

Trajectory transform_to_frame(const Trajectory& traj, const Pose2& frame) {
  Trajectory out;
  out.sample_rate_hz = traj.sample_rate_hz;
  out.waypoints.reserve(traj.waypoints.size());
  for (const Waypoint& wp : traj.waypoints) {
    Waypoint w = wp;
    w.pose = frame.to_local(wp.pose);
    out.waypoints.push_back(w);
  }
  return out;
}

double ade(const Trajectory& pred, const Trajectory& gt) {
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("ade: trajectory waypoint counts differ (" +
                                std::to_string(pred.size()) + " vs " + std::to_string(gt.size()) +
                                ")");
  }
  if (pred.empty()) {
    throw std::invalid_argument("ade: empty trajectories");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::abs(pred.waypoints[i].t - gt.waypoints[i].t) > 1e-9) {
      throw std::invalid_argument("ade: timestamp mismatch at waypoint " + std::to_string(i));
    }
    sum += dist(pred.waypoints[i].pose.position(), gt.waypoints[i].pose.position());
  }
  return sum / static_cast<double>(pred.size());
}

bool RoadMap::in_drivable(const Vec2& p) const {
  for (const auto& poly : drivable_area) {
    if (point_in_polygon(p, poly)) return true;
  }
  return false;
}

namespace {
Pose2 interpolate_pose(const Pose2& a, const Pose2& b, double t) {
  Pose2 out;
  out.x = a.x + (b.x - a.x) * t;
  out.y = a.y + (b.y - a.y) * t;
  out.heading = normalize_angle(a.heading + normalize_angle(b.heading - a.heading) * t);
  return out;
}

template <typename State>
std::pair<std::size_t, double> locate(const std::vector<State>& states, double t) {
  if (t <= states.front().t) return {0, 0.0};
  if (t >= states.back().t) return {states.size() - 1, 0.0};
  std::size_t lo = 0, hi = states.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (states[mid].t <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double span = states[hi].t - states[lo].t;
  return {lo, span > 1e-12 ? (t - states[lo].t) / span : 0.0};
}
}  // namespace

Pose2 AgentTrack::pose_at(double t) const {
  const auto [i, f] = locate(states, t);
  if (f == 0.0) return states[i].pose;
  return interpolate_pose(states[i].pose, states[i + 1].pose, f);
}

double AgentTrack::speed_at(double t) const {
  const auto [i, f] = locate(states, t);
  if (f == 0.0) return states[i].speed;
  return states[i].speed + (states[i + 1].speed - states[i].speed) * f;
}

bool AgentTrack::is_stationary() const {
  for (const AgentState& s : states) {
    if (s.speed > 0.05) return false;
  }
  return true;
}

OrientedBox AgentTrack::box_at(double t) const {
  const Pose2 p = pose_at(t);
  return {p.position(), p.heading, length / 2.0, width / 2.0};
}

Pose2 Scene::history_pose_at(double t) const {
  const auto [i, f] = locate(ego_history.waypoints, t);
  if (f == 0.0) return ego_history.waypoints[i].pose;
  return interpolate_pose(ego_history.waypoints[i].pose, ego_history.waypoints[i + 1].pose, f);
}

double Scene::history_speed_at(double t) const {
  const auto [i, f] = locate(ego_history.waypoints, t);
  if (f == 0.0) return ego_history.waypoints[i].speed;
  return ego_history.waypoints[i].speed +
         (ego_history.waypoints[i + 1].speed - ego_history.waypoints[i].speed) * f;
}

OrientedBox ego_box(const Pose2& pose) {
  // Rear-axle origin; geometric center sits forward of it.
  const Vec2 center = pose.to_world(Vec2{kEgoLength / 2.0 - kEgoRearOverhang, 0.0});
  return {center, pose.heading, kEgoLength / 2.0, kEgoWidth / 2.0};
}

void validate_demonstration(const Demonstration& demo) {
  const Scene& s = demo.scene;
  if (s.ego_history.size() != kHistorySamples) {
    throw std::invalid_argument("ego_history: expected " + std::to_string(kHistorySamples) +
                                " samples, got " + std::to_string(s.ego_history.size()));
  }
  if (demo.expert_future.size() != kPlanWaypoints) {
    throw std::invalid_argument("expert_future: expected " + std::to_string(kPlanWaypoints) +
                                " waypoints, got " + std::to_string(demo.expert_future.size()));
  }
  // The first future waypoint sits 0.5 s ahead, so allow the kinematically
  // reachable distance on top of the 2 m slack.
  const double d0 = demo.expert_future.front().pose.position().norm();
  const double reach = 2.0 + 0.5 * s.start_speed() + 0.5;
  if (d0 > reach) {
    throw std::invalid_argument("expert_future: first waypoint " + std::to_string(d0) +
                                " m from origin exceeds reachable " + std::to_string(reach));
  }
  if (s.nav.route.empty()) {
    throw std::invalid_argument("nav.route: empty");
  }
  if (s.nav.distance_to_intersection < 0.0) {
    throw std::invalid_argument("nav.distance_to_intersection: negative");
  }
  for (const LaneSegment& lane : s.road_map.lanes) {
    if (lane.centerline.size() < 2) {
      throw std::invalid_argument("road_map.lanes: centerline with fewer than 2 points");
    }
    if (lane.width <= 0.0) {
      throw std::invalid_argument("road_map.lanes: non-positive width");
    }
  }
  if (!s.road_map.in_drivable(s.start_pose().position())) {
    throw std::invalid_argument("ego start pose outside drivable area");
  }
}

}  // namespace drivelab
