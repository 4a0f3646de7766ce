#ifndef DRIVELAB_EXPERT_HPP
#define DRIVELAB_EXPERT_HPP

#include <memory>
#include <vector>

#include "drivelab/scene.hpp"
#include "drivelab/sim.hpp"

namespace drivelab {

/// Rule-based oracle: centerline tracking with pure pursuit, IDM gap control,
/// comfortable braking for red lights and pedestrians, and smooth nudge
/// offsets around static blockers. Accelerations stay inside the closed-loop
/// comfort thresholds.
struct ExpertConfig {
  double max_accel{1.7};          // m/s^2
  double comfort_decel{2.3};      // planned braking, m/s^2
  double hard_decel{3.2};         // emergency clamp, m/s^2
  double jerk_limit{5.5};         // m/s^3
  double time_headway{1.35};      // s (IDM T)
  double min_gap{5.5};            // m (IDM s0)
  double stop_margin{2.5};        // m before stop lines
  double ped_margin{4.0};         // m before a crossing pedestrian
  double lane_change_duration{3.5};  // s, used by scenario construction
  double lat_accel_comfort{3.0};  // m/s^2 cap for curves
  double yaw_comfort{0.78};       // rad/s cap
  double nudge_clearance{0.4};    // m beyond obstacle edge
};

class ExpertPlanner {
 public:
  ExpertPlanner(const Scene& scene, ExpertConfig config = {});

  /// 12-waypoint plan in the ego frame at (t_now, pose), timestamps 0.5..6.0.
  Trajectory plan_at(double t_now, const Pose2& pose, double speed, double accel0) const;

  /// Plan from the scene's start state (t = 0).
  Trajectory plan() const;

  /// Lateral nudge offset around static blockers at a route station.
  double offset_at(double station) const;

  bool feasible() const { return feasible_; }

 private:
  struct StepState {
    Pose2 pose;
    double speed;
    double accel;
    double station;
  };
  StepState advance(const StepState& st, double t, double dt) const;

  const Scene& scene_;
  ExpertConfig cfg_;
  Polyline route_;
  std::vector<double> limit_;   // per route sample
  std::vector<double> vcurve_;  // curvature speed cap per route sample
  double sample_step_{2.0};
  double stop_line_station_{-1.0};
  double route_end_station_{0.0};
  struct NudgeBump {
    double s_ramp_in, s_flat_begin, s_flat_end, s_ramp_out;
    double offset;
  };
  std::vector<NudgeBump> bumps_;
  bool feasible_{false};
};

/// Expert plan for a scene from its start state.
Trajectory expert_plan(const Scene& scene, const ExpertConfig& config = {});

/// Closed-loop policy wrapper around the expert (owns the planner).
PolicyFn make_expert_policy(const Scene& scene, const ExpertConfig& config = {});

}  // namespace drivelab

#endif  // DRIVELAB_EXPERT_HPP
