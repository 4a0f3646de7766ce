#include "drivelab/expert.hpp"

#include <algorithm>
#include <cmath>

namespace drivelab {

namespace {
constexpr double kEgoFront = kEgoLength - kEgoRearOverhang;  // rear axle to front bumper
constexpr double kCorridorHalf = 1.6;                        // lead-vehicle lateral window

double smooth_ramp(double u) { return 0.5 * (1.0 - std::cos(kPi * std::clamp(u, 0.0, 1.0))); }
}  // namespace

ExpertPlanner::ExpertPlanner(const Scene& scene, ExpertConfig config)
    : scene_(scene), cfg_(config) {
  if (scene.nav.route.size() < 2) return;
  route_ = Polyline(densify(scene.nav.route, sample_step_));
  route_end_station_ = route_.length();
  const auto& pts = route_.points();

  // Per-sample speed limit from the nearest aligned lane.
  std::vector<Polyline> lanes;
  lanes.reserve(scene.road_map.lanes.size());
  for (const auto& l : scene.road_map.lanes) lanes.emplace_back(l.centerline);
  limit_.resize(pts.size(), 10.0);
  double cum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) cum += dist(pts[i - 1], pts[i]);
    double best_d = 1e18;
    double limit = 10.0;
    const double rh = route_.heading_at(cum);
    for (std::size_t k = 0; k < lanes.size(); ++k) {
      if (lanes[k].empty()) continue;
      const auto proj = lanes[k].project(pts[i]);
      const double dh =
          std::abs(normalize_angle(rh - lanes[k].heading_at(proj.station)));
      if (dh > 1.2) continue;
      if (proj.dist < best_d) {
        best_d = proj.dist;
        limit = scene.road_map.lanes[k].speed_limit;
      }
    }
    limit_[i] = limit;
  }

  // Curvature speed cap over a +-4 m heading window.
  vcurve_.resize(pts.size(), 1e9);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double s = std::min(static_cast<double>(i) * sample_step_, route_.length());
    const double ds = 4.0;
    const double h0 = route_.heading_at(std::max(0.0, s - ds));
    const double h1 = route_.heading_at(std::min(route_.length(), s + ds));
    const double kappa = std::abs(normalize_angle(h1 - h0)) / (2.0 * ds);
    if (kappa > 1e-4) {
      const double r = 1.0 / kappa;
      vcurve_[i] = std::min(std::sqrt(cfg_.lat_accel_comfort * r), cfg_.yaw_comfort * r);
    }
  }

  // Station of the linked stop line, if the route crosses it.
  const int sl_id = scene.traffic_light.stop_line_id;
  if (sl_id >= 0 && sl_id < static_cast<int>(scene.road_map.stop_lines.size())) {
    const StopLine& sl = scene.road_map.stop_lines[sl_id];
    const Vec2 mid = (sl.a + sl.b) * 0.5;
    const auto proj = route_.project(mid);
    if (std::abs(proj.lateral) < 4.0) stop_line_station_ = proj.station;
  }

  // Nudge bumps around static blockers overlapping the corridor.
  const double v0 = scene.start_speed();
  for (const AgentTrack& agent : scene_.agents) {
    if (agent.cls != AgentClass::STATIC_OBSTACLE) continue;
    const OrientedBox box = agent.box_at(0.0);
    const auto cproj = route_.project(box.center);
    if (cproj.station <= 0.0 || cproj.station >= route_.length()) continue;
    double d_lo = 1e18, d_hi = -1e18;
    for (const Vec2& c : box.corners()) {
      const auto p = route_.project_near(c, cproj.station, 15.0);
      d_lo = std::min(d_lo, p.lateral);
      d_hi = std::max(d_hi, p.lateral);
    }
    const double body_half = kEgoWidth / 2.0 + 0.15;
    if (d_lo > body_half || d_hi < -body_half) continue;  // not blocking
    double offset;
    if (cproj.lateral > 0.0) {
      offset = d_lo - kEgoWidth / 2.0 - cfg_.nudge_clearance;  // pass on the right
    } else {
      offset = d_hi + kEgoWidth / 2.0 + cfg_.nudge_clearance;  // pass on the left
    }
    offset = std::clamp(offset, -1.55, 1.55);
    const double half_len = agent.length / 2.0;
    const double ramp = std::max(14.0, kPi * v0 * std::sqrt(std::abs(offset) / 5.0));
    NudgeBump b;
    b.s_flat_begin = cproj.station - half_len - 8.0;
    b.s_ramp_in = b.s_flat_begin - ramp;
    b.s_flat_end = cproj.station + half_len + 5.0;
    b.s_ramp_out = b.s_flat_end + 0.8 * ramp;
    b.offset = offset;
    bumps_.push_back(b);
  }

  feasible_ = true;
}

double ExpertPlanner::offset_at(double station) const {
  double off = 0.0;
  for (const NudgeBump& b : bumps_) {
    if (station <= b.s_ramp_in || station >= b.s_ramp_out) continue;
    if (station < b.s_flat_begin) {
      off += b.offset * smooth_ramp((station - b.s_ramp_in) / (b.s_flat_begin - b.s_ramp_in));
    } else if (station <= b.s_flat_end) {
      off += b.offset;
    } else {
      off += b.offset * smooth_ramp((b.s_ramp_out - station) / (b.s_ramp_out - b.s_flat_end));
    }
  }
  return off;
}

ExpertPlanner::StepState ExpertPlanner::advance(const StepState& st, double t, double dt) const {
  const double s = st.station;
  const auto limit_lookup = [&](double at) {
    const std::size_t i = std::min(static_cast<std::size_t>(std::max(0.0, at) / sample_step_),
                                   limit_.size() - 1);
    return limit_[i];
  };
  const auto curve_lookup = [&](double at) {
    const std::size_t i = std::min(static_cast<std::size_t>(std::max(0.0, at) / sample_step_),
                                   vcurve_.size() - 1);
    return vcurve_[i];
  };

  // Allowed speed now: current limit plus braking-aware caps ahead.
  double v_allow = std::min(limit_lookup(s), curve_lookup(s));
  const double lag = 0.3 * st.speed;  // jerk ramp-up allowance
  for (double d = 2.0; d <= 90.0; d += 2.0) {
    const double cap = std::min(limit_lookup(s + d), curve_lookup(s + d));
    const double reach = std::sqrt(std::max(0.0, cap * cap + 2.0 * cfg_.comfort_decel *
                                                                  std::max(0.0, d - lag)));
    v_allow = std::min(v_allow, reach);
  }

  // Stop targets: red light, crossing pedestrians, route end.
  auto stop_cap = [&](double stop_s) {
    const double d = stop_s - s;
    if (d <= 0.05) return 0.0;
    return std::sqrt(std::max(0.0, 2.0 * cfg_.comfort_decel * std::max(0.0, d - lag)));
  };
  if (stop_line_station_ > 0.0 && scene_.traffic_light.state_at(t) == LightState::RED) {
    const double stop_s = stop_line_station_ - cfg_.stop_margin - kEgoFront;
    if (s < stop_line_station_) v_allow = std::min(v_allow, stop_cap(stop_s));
  }
  for (const AgentTrack& agent : scene_.agents) {
    if (agent.cls != AgentClass::PEDESTRIAN) continue;
    const auto proj = route_.project_near(agent.pose_at(t).position(), s, 60.0);
    if (proj.station <= s || proj.station > s + 60.0) continue;
    if (std::abs(proj.lateral) > 2.2) continue;
    v_allow = std::min(v_allow, stop_cap(proj.station - cfg_.ped_margin - kEgoFront));
  }
  v_allow = std::min(v_allow, stop_cap(route_end_station_ - 1.0));

  double a_des = std::clamp((v_allow - st.speed) / 0.5, -cfg_.hard_decel, cfg_.max_accel);

  // IDM gap control on the nearest lead vehicle in the corridor.
  for (const AgentTrack& agent : scene_.agents) {
    if (agent.cls != AgentClass::VEHICLE) continue;
    const Pose2 ap = agent.pose_at(t);
    const auto proj = route_.project_near(ap.position(), s, 80.0);
    const double ds = proj.station - s;
    if (ds <= 0.0 || ds > 80.0) continue;
    if (std::abs(proj.lateral - offset_at(proj.station)) > kCorridorHalf) continue;
    const double gap = ds - agent.length / 2.0 - kEgoFront;
    const double v_lead = std::max(0.0, agent.speed_at(t) *
                                            std::cos(normalize_angle(ap.heading -
                                                                     route_.heading_at(proj.station))));
    if (gap < 0.3) {
      a_des = std::min(a_des, -cfg_.hard_decel);
      continue;
    }
    const double v0ref = std::max(1.0, v_allow);
    const double s_star = cfg_.min_gap + st.speed * cfg_.time_headway +
                          st.speed * (st.speed - v_lead) /
                              (2.0 * std::sqrt(cfg_.max_accel * cfg_.comfort_decel));
    const double a_idm =
        cfg_.max_accel * (1.0 - std::pow(st.speed / v0ref, 4.0) - std::pow(s_star / gap, 2.0));
    a_des = std::min(a_des, a_idm);
  }

  a_des = std::clamp(a_des, -cfg_.hard_decel, cfg_.max_accel);
  const double max_da = cfg_.jerk_limit * dt;
  double accel = st.accel + std::clamp(a_des - st.accel, -max_da, max_da);
  double v_new = st.speed + accel * dt;
  if (v_new < 0.0) {
    v_new = 0.0;
    accel = (v_new - st.speed) / dt;
  }

  // Pure pursuit toward the offset reference path.
  StepState next = st;
  const double look = std::clamp(1.2 + 0.55 * st.speed, 2.5, 14.0);
  const double s_t = std::min(s + look, route_.length());
  const double rh = route_.heading_at(s_t);
  const Vec2 normal{-std::sin(rh), std::cos(rh)};
  const Vec2 target = route_.point_at(s_t) + normal * offset_at(s_t);
  double heading = st.pose.heading;
  double yaw_rate = 0.0;
  if (v_new > 0.05) {
    const Vec2 dp = target - st.pose.position();
    if (dp.norm() > 0.3) {
      const double alpha = normalize_angle(std::atan2(dp.y, dp.x) - heading);
      const double kappa = 2.0 * std::sin(alpha) / std::max(1.0, dp.norm());
      double yaw_cap = cfg_.yaw_comfort;
      if (v_new > 0.5) yaw_cap = std::min(yaw_cap, cfg_.lat_accel_comfort / v_new);
      yaw_rate = std::clamp(v_new * kappa, -yaw_cap, yaw_cap);
      heading = normalize_angle(heading + yaw_rate * dt);
    }
  }
  const Vec2 pos =
      st.pose.position() + Vec2{std::cos(heading), std::sin(heading)} * (v_new * dt);
  next.pose = {pos.x, pos.y, heading};
  next.speed = v_new;
  next.accel = accel;
  next.station = route_.project_near(pos, s, 3.0 + v_new * dt * 2.0).station;
  return next;
}

Trajectory ExpertPlanner::plan_at(double t_now, const Pose2& pose, double speed,
                                  double accel0) const {
  Trajectory out;
  out.sample_rate_hz = kPlanRateHz;
  if (!feasible_) return out;

  StepState st;
  st.pose = pose;
  st.speed = speed;
  st.accel = accel0;
  st.station = route_.project(pose.position()).station;

  const double dt = 0.1;
  const int steps = static_cast<int>(kPlanHorizonSec / dt);
  for (int k = 1; k <= steps; ++k) {
    st = advance(st, t_now + (k - 1) * dt, dt);
    if (k % 5 == 0) {
      Waypoint wp;
      wp.t = k * dt;
      wp.pose = pose.to_local(st.pose);
      wp.speed = st.speed;
      out.waypoints.push_back(wp);
    }
  }
  return out;
}

Trajectory ExpertPlanner::plan() const {
  const auto& h = scene_.ego_history.waypoints;
  double accel0 = 0.0;
  if (h.size() >= 2) {
    const double dt = h[h.size() - 1].t - h[h.size() - 2].t;
    if (dt > 1e-6) accel0 = (h[h.size() - 1].speed - h[h.size() - 2].speed) / dt;
  }
  return plan_at(0.0, scene_.start_pose(), scene_.start_speed(), accel0);
}

Trajectory expert_plan(const Scene& scene, const ExpertConfig& config) {
  return ExpertPlanner(scene, config).plan();
}

PolicyFn make_expert_policy(const Scene& scene, const ExpertConfig& config) {
  auto planner = std::make_shared<ExpertPlanner>(scene, config);
  return [planner](const PlanInput& input) {
    double accel0 = 0.0;
    const auto& h = input.history.waypoints;
    if (h.size() >= 2) {
      const double dt = h[h.size() - 1].t - h[h.size() - 2].t;
      if (dt > 1e-6) accel0 = (h[h.size() - 1].speed - h[h.size() - 2].speed) / dt;
    }
    return planner->plan_at(input.t_now, input.ego_pose, input.ego_speed, accel0);
  };
}

}  // namespace drivelab
