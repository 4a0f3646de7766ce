#ifndef DRIVELAB_SIM_HPP
#define DRIVELAB_SIM_HPP

#include <functional>
#include <string>
#include <vector>

#include "drivelab/scene.hpp"

namespace drivelab {

enum class EventType {
  COLLISION,
  OFF_DRIVABLE,
  SOLID_LINE_CROSS,
  RED_LIGHT_RUN,
  PEDESTRIAN_NOT_YIELDED,
  WRONG_WAY,
  SPEEDING,
  LANE_CHANGE,
  DETOUR,
  GOAL_REACHED,
  POLICY_ERROR,
};

std::string to_string(EventType e);

struct SimEvent {
  EventType type;
  int step{0};
  bool at_fault{false};  // COLLISION
  bool valid{false};     // LANE_CHANGE
};

struct EgoStepState {
  double t{0.0};
  Pose2 pose;
  double speed{0.0};
  double accel{0.0};
  double yaw_rate{0.0};
};

struct SimTrace {
  std::vector<EgoStepState> states;
  std::vector<SimEvent> events;
  bool truncated{false};

  bool has_event(EventType e) const;
};

struct ComfortThresholds {
  double max_abs_lat_accel{4.89};   // m/s^2
  double min_lon_accel{-4.05};      // m/s^2
  double max_lon_accel{2.40};       // m/s^2
  double max_abs_yaw_rate{0.95};    // rad/s
  double max_abs_jerk{8.37};        // m/s^3
  double min_turn_radius{4.0};      // m, evaluated above radius_speed
  double radius_speed{3.0};         // m/s
};

struct ScorePenalties {
  double rule_deduction{0.2};       // per distinct violation class
  double efficiency_factor{0.9};    // per invalid lane change / detour
  double navigation_partial{0.5};   // goal reached via non-commanded maneuver
  double off_drivable_cap{0.1};     // time fraction that zeroes the term
};

struct SimConfig {
  double dt{0.1};             // fixed at 10 Hz
  int replan_interval{5};     // steps between policy queries
  double horizon{15.0};       // seconds
  double max_accel{3.0};      // tracking clamp, m/s^2
  double max_yaw_rate{1.2};   // tracking clamp, rad/s
  ComfortThresholds comfort;
  ScorePenalties penalties;
};

/// What a policy sees at a replanning step.
struct PlanInput {
  const Scene* scene{nullptr};
  double t_now{0.0};
  Pose2 ego_pose;
  double ego_speed{0.0};
  Trajectory history;  // world frame, last 2 s at 10 Hz, back() = current
};

/// Returns a 12-waypoint trajectory in the ego frame at t_now, timestamps
/// 0.5..6.0 relative to t_now.
using PolicyFn = std::function<Trajectory(const PlanInput&)>;

SimTrace rollout(const PolicyFn& policy, const Scene& scene, const SimConfig& config);

struct MetricScores {
  double safety{0.0};
  double comfort{0.0};
  double rule{0.0};
  double efficiency{0.0};
  double navigation{0.0};
  double total{0.0};
};

double score_safety(const SimTrace& trace, const Scene& scene, const SimConfig& config);
double score_comfort(const SimTrace& trace, const SimConfig& config);
double score_rule(const SimTrace& trace, const Scene& scene, const SimConfig& config);
double score_efficiency(const SimTrace& trace, const Scene& scene, double expert_progress,
                        const SimConfig& config);
double score_navigation(const SimTrace& trace, const Scene& scene, double expert_final_station,
                        const SimConfig& config);

/// Weighted total; throws std::invalid_argument if a component is outside [0,1].
double total_score(const MetricScores& scores);

/// Route-projected progress of a trace: (arc progress, final station).
std::pair<double, double> route_progress(const SimTrace& trace, const Scene& scene);

/// Score a policy trace against the expert reference rollout of the same scene.
MetricScores score_all(const SimTrace& trace, const Scene& scene, const SimTrace& expert_trace,
                       const SimConfig& config);

/// Serialize a trace as line-delimited records (step, ego state, events).
void write_trace(const SimTrace& trace, const std::string& path);

}  // namespace drivelab

#endif  // DRIVELAB_SIM_HPP
