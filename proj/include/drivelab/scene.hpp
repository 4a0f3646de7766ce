#ifndef DRIVELAB_SCENE_HPP
#define DRIVELAB_SCENE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drivelab/geom.hpp"

namespace drivelab {

// Planning horizons. The planner emits a 6 s future at 2 Hz (12 waypoints at
// t = 0.5..6.0) from a 2 s ego history sampled at 10 Hz (20 states at
// t = -1.9..0.0, the last being the current state).
inline constexpr int kPlanWaypoints = 12;
inline constexpr double kPlanRateHz = 2.0;
inline constexpr double kPlanHorizonSec = 6.0;
inline constexpr int kHistorySamples = 20;
inline constexpr double kHistoryRateHz = 10.0;

// Ego footprint, origin at rear-axle center.
inline constexpr double kEgoLength = 4.6;
inline constexpr double kEgoWidth = 1.9;
inline constexpr double kEgoRearOverhang = 1.1;  // rear axle to rear bumper

// Sentinel for "no intersection on this route".
inline constexpr double kNoIntersection = 1.0e6;

enum class RoadClass { HIGHWAY, MAINROAD, SUBROAD };
enum class DividerStyle { SOLID, DASHED, NONE };
enum class AgentClass { VEHICLE, PEDESTRIAN, STATIC_OBSTACLE };
enum class Command { KEEP, TURN_LEFT, TURN_RIGHT, U_TURN, LC_LEFT, LC_RIGHT };
enum class LightState { RED, GREEN, NONE };

enum class ScenarioType {
  HIGHWAY_CRUISE,
  HIGHWAY_LC_LEFT,
  HIGHWAY_LC_RIGHT,
  HIGHWAY_NUDGE_OBS,
  HIGHWAY_MERGE,
  HIGHWAY_EXIT,
  MAINROAD_CRUISE,
  MAINROAD_LC_LEFT,
  MAINROAD_LC_RIGHT,
  MAINROAD_NUDGE_OBS,
  SUBROAD_CRUISE,
  SUBROAD_NUDGE_OBS,
  DOWN_SUBROAD_LC,
  SUBROAD_TO_MAINROAD_HIGHWAY,
  MAINROAD_TO_SUBROAD,
  TURN_LEFT,
  TURN_RIGHT,
  U_TURN,
  WAIT_TURN,
  STOP_RED_LIGHT,
  START_GREEN_LIGHT,
  YIELD_PEDESTRIAN,
  INTERSECTION_STRAIGHT,
  AMBIGUOUS,
};

inline constexpr int kNumScenarioTypes = 23;  // excluding AMBIGUOUS

const std::vector<ScenarioType>& all_scenario_types();

std::string to_string(ScenarioType t);
std::string to_string(RoadClass c);
std::string to_string(DividerStyle s);
std::string to_string(AgentClass c);
std::string to_string(Command c);
std::string to_string(LightState s);

ScenarioType scenario_type_from_string(const std::string& s);
RoadClass road_class_from_string(const std::string& s);
DividerStyle divider_style_from_string(const std::string& s);
AgentClass agent_class_from_string(const std::string& s);
Command command_from_string(const std::string& s);
LightState light_state_from_string(const std::string& s);

struct Waypoint {
  double t{0.0};
  Pose2 pose;
  double speed{0.0};
};

struct Trajectory {
  std::vector<Waypoint> waypoints;
  double sample_rate_hz{0.0};

  bool empty() const { return waypoints.empty(); }
  const Waypoint& front() const { return waypoints.front(); }
  const Waypoint& back() const { return waypoints.back(); }
  std::size_t size() const { return waypoints.size(); }
};

/// Express every waypoint of `traj` in the coordinate frame anchored at `frame`.
Trajectory transform_to_frame(const Trajectory& traj, const Pose2& frame);

/// Average displacement error between two trajectories with matching timestamps.
/// Throws std::invalid_argument on waypoint-count or timestamp mismatch.
double ade(const Trajectory& pred, const Trajectory& gt);

struct LaneSegment {
  int id{0};
  int road_id{0};
  std::vector<Vec2> centerline;
  double width{3.5};
  RoadClass road_class{RoadClass::MAINROAD};
  DividerStyle left_divider{DividerStyle::NONE};
  DividerStyle right_divider{DividerStyle::NONE};
  double speed_limit{13.0};
};

struct Crosswalk {
  std::vector<Vec2> polygon;
};

struct StopLine {
  Vec2 a;
  Vec2 b;
  int light_id{-1};
};

struct RoadMap {
  std::vector<LaneSegment> lanes;
  std::vector<Crosswalk> crosswalks;
  std::vector<StopLine> stop_lines;
  std::vector<std::vector<Vec2>> drivable_area;

  bool in_drivable(const Vec2& p) const;
};

struct AgentState {
  double t{0.0};
  Pose2 pose;
  double speed{0.0};
};

struct AgentTrack {
  int id{0};
  AgentClass cls{AgentClass::VEHICLE};
  double length{4.5};
  double width{1.9};
  std::vector<AgentState> states;  // 10 Hz over the full episode

  Pose2 pose_at(double t) const;
  double speed_at(double t) const;
  /// True if the agent never moves over its whole track.
  bool is_stationary() const;
  OrientedBox box_at(double t) const;
};

/// One light with an optional single scheduled switch. The classifier and the
/// dataset label always use the state at t = 0.
struct TrafficLight {
  LightState initial{LightState::NONE};
  int stop_line_id{-1};
  double switch_time{-1.0};  // < 0 means no switch
  LightState after{LightState::NONE};

  LightState state_at(double t) const {
    return (switch_time >= 0.0 && t >= switch_time) ? after : initial;
  }
};

struct NavigationContext {
  Command command{Command::KEEP};
  std::vector<Vec2> route;  // dense reference polyline in world frame
  double distance_to_intersection{kNoIntersection};
  RoadClass target_road_class{RoadClass::MAINROAD};
};

struct Scene {
  std::string scene_id;
  RoadMap road_map;
  std::vector<AgentTrack> agents;
  Trajectory ego_history;  // world frame, 2 s at 10 Hz, last = current state
  NavigationContext nav;
  TrafficLight traffic_light;
  double episode_duration{15.0};
  std::optional<ScenarioType> scenario_label;
  std::uint64_t seed{0};

  Pose2 start_pose() const { return ego_history.back().pose; }
  double start_speed() const { return ego_history.back().speed; }
  /// Ego pose interpolated within the recorded history, t in [-1.9, 0].
  Pose2 history_pose_at(double t) const;
  double history_speed_at(double t) const;
};

struct Demonstration {
  Scene scene;
  Trajectory expert_future;  // ego frame at t=0, 12 waypoints at t=0.5..6.0
};

/// Structural validation used by the dataset reader; throws
/// std::invalid_argument naming the offending field.
void validate_demonstration(const Demonstration& demo);

OrientedBox ego_box(const Pose2& pose);

}  // namespace drivelab

#endif  // DRIVELAB_SCENE_HPP
