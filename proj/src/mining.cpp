#include "drivelab/mining.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace drivelab {

namespace {
constexpr double kEgoFrontLen = kEgoLength - kEgoRearOverhang;

/// Ego lane centerline extended past its end along the final tangent, so
/// lateral displacement stays well defined for merge lanes that terminate.
Polyline extended_centerline(const LaneSegment& lane) {
  std::vector<Vec2> pts = lane.centerline;
  const Vec2 d = pts.back() - pts[pts.size() - 2];
  const double n = d.norm();
  if (n > 1e-9) pts.push_back(pts.back() + d * (150.0 / n));
  return Polyline(pts);
}

int find_ego_lane(const Scene& scene) {
  const Pose2 pose = scene.start_pose();
  int best = -1;
  double best_d = 1e18;
  for (std::size_t i = 0; i < scene.road_map.lanes.size(); ++i) {
    const LaneSegment& lane = scene.road_map.lanes[i];
    const Polyline line(lane.centerline);
    const auto proj = line.project(pose.position());
    const double dh = std::abs(normalize_angle(pose.heading - line.heading_at(proj.station)));
    if (dh > 1.0) continue;
    if (std::abs(proj.lateral) > lane.width / 2.0 + 0.3) continue;
    if (proj.dist < best_d) {
      best_d = proj.dist;
      best = static_cast<int>(i);
    }
  }
  return best;
}
}  // namespace

MetaInfo extract_meta(const Scene& scene, const Trajectory& future_ego_frame,
                      const MiningConfig& cfg) {
  MetaInfo m;
  m.command = scene.nav.command;
  m.light = scene.traffic_light.initial;
  m.end_class = scene.nav.target_road_class;
  m.ego_stopped = scene.start_speed() < cfg.stopped_speed;
  m.intersection_near = scene.nav.distance_to_intersection <= cfg.intersection_near;

  const Pose2 start = scene.start_pose();
  const double v0 = scene.start_speed();
  const int ego_lane_idx = find_ego_lane(scene);

  Polyline lane_line;
  double lane_len = 0.0;
  double ego_station_on_lane = 0.0;
  if (ego_lane_idx >= 0) {
    const LaneSegment& lane = scene.road_map.lanes[ego_lane_idx];
    m.start_class = lane.road_class;
    m.lane_width = lane.width;
    lane_line = extended_centerline(lane);
    lane_len = Polyline(lane.centerline).length();
    ego_station_on_lane = lane_line.project(start.position()).station;
  }

  const Polyline route(scene.nav.route);
  const double ego_route_station = route.empty() ? 0.0 : route.project(start.position()).station;

  // Lane end ahead with the route continuing past it (merge geometry).
  if (ego_lane_idx >= 0 && !route.empty()) {
    const double remaining = lane_len - ego_station_on_lane;
    m.lane_ends = remaining > 0.0 && remaining < cfg.lane_end_window &&
                  route.length() - ego_route_station > remaining + 15.0;
  }

  // Future trajectory in world coordinates.
  std::vector<Pose2> future_world;
  future_world.reserve(future_ego_frame.size());
  for (const Waypoint& w : future_ego_frame.waypoints) {
    future_world.push_back(start.to_world(w.pose));
  }

  if (!lane_line.empty() && !future_world.empty()) {
    double lo = 1e18, hi = -1e18;
    for (const Pose2& p : future_world) {
      const double lat = lane_line.project(p.position()).lateral;
      lo = std::min(lo, lat);
      hi = std::max(hi, lat);
    }
    m.lat_disp_min = lo;
    m.lat_disp_max = hi;
  }

  if (future_world.size() >= 2) {
    double net = 0.0;
    double prev = start.heading;
    for (const Pose2& p : future_world) {
      net += normalize_angle(p.heading - prev);
      prev = p.heading;
    }
    m.heading_change = net;
  }
  m.min_future_speed = 1e18;
  for (const Waypoint& w : future_ego_frame.waypoints) {
    m.min_future_speed = std::min(m.min_future_speed, w.speed);
  }
  if (future_ego_frame.empty()) m.min_future_speed = v0;

  // Static obstacle blocking the ego-lane corridor ahead.
  if (!lane_line.empty()) {
    const double window = std::max(45.0, 6.5 * v0);
    for (const AgentTrack& agent : scene.agents) {
      if (agent.cls != AgentClass::STATIC_OBSTACLE) continue;
      const OrientedBox box = agent.box_at(0.0);
      for (const Vec2& c : box.corners()) {
        const auto proj = lane_line.project(c);
        const double ds = proj.station - ego_station_on_lane;
        if (ds < 2.0 || ds > window) continue;
        if (std::abs(proj.lateral) <= m.lane_width / 2.0 + cfg.obstacle_lat_margin) {
          m.obstacle_block = true;
          break;
        }
      }
      if (m.obstacle_block) break;
    }
  }

  if (!route.empty()) {
    const double ped_window = std::max(35.0, 6.0 * v0);
    for (const AgentTrack& agent : scene.agents) {
      if (agent.cls != AgentClass::PEDESTRIAN) continue;
      for (double t = 0.0; t <= 5.0 && !m.ped_ahead; t += 0.5) {
        const auto proj = route.project_near(agent.pose_at(t).position(), ego_route_station, 80.0);
        const double ds = proj.station - ego_route_station;
        if (ds > 0.0 && ds <= ped_window && std::abs(proj.lateral) <= cfg.ped_corridor_half) {
          m.ped_ahead = true;
        }
      }
      if (m.ped_ahead) break;
    }

    for (const AgentTrack& agent : scene.agents) {
      if (agent.cls != AgentClass::VEHICLE) continue;
      const auto proj = route.project_near(agent.pose_at(0.0).position(), ego_route_station, 40.0);
      const double gap = proj.station - ego_route_station - agent.length / 2.0 - kEgoFrontLen;
      if (proj.station > ego_route_station && gap <= cfg.lead_close_dist &&
          std::abs(proj.lateral) <= cfg.lead_corridor_half) {
        m.lead_close = true;
        break;
      }
    }
  }

  return m;
}

namespace {
struct Predicates {
  const MetaInfo& m;
  const MiningConfig& cfg;

  bool cls(RoadClass c) const { return m.start_class == c; }
  bool end(RoadClass c) const { return m.end_class == c; }
  bool cmd(Command c) const { return m.command == c; }
  bool light(LightState s) const { return m.light == s; }
  bool lc_left() const { return m.lat_disp_max >= cfg.lc_fraction * m.lane_width; }
  bool lc_right() const { return m.lat_disp_min <= -cfg.lc_fraction * m.lane_width; }
  bool nudge() const {
    return std::max(m.lat_disp_max, -m.lat_disp_min) >= cfg.nudge_min_offset;
  }
  bool turn_left() const { return m.heading_change >= cfg.turn_heading; }
  bool turn_right() const { return m.heading_change <= -cfg.turn_heading; }
  bool uturn() const { return std::abs(m.heading_change) >= cfg.uturn_heading; }
  bool stops() const { return m.min_future_speed <= cfg.stopped_speed; }

  bool holds(ScenarioType t) const {
    const bool no_actors = !m.obstacle_block && !m.ped_ahead;
    switch (t) {
      case ScenarioType::HIGHWAY_CRUISE:
        return cls(RoadClass::HIGHWAY) && end(RoadClass::HIGHWAY) && cmd(Command::KEEP) &&
               light(LightState::NONE) && no_actors && !m.lead_close && !m.ego_stopped &&
               !m.intersection_near && !m.lane_ends;
      case ScenarioType::HIGHWAY_LC_LEFT:
        return cls(RoadClass::HIGHWAY) && end(RoadClass::HIGHWAY) && cmd(Command::LC_LEFT) &&
               light(LightState::NONE) && no_actors && !m.intersection_near && !m.lane_ends &&
               lc_left();
      case ScenarioType::HIGHWAY_LC_RIGHT:
        return cls(RoadClass::HIGHWAY) && end(RoadClass::HIGHWAY) && cmd(Command::LC_RIGHT) &&
               light(LightState::NONE) && no_actors && !m.intersection_near && !m.lane_ends &&
               lc_right();
      case ScenarioType::HIGHWAY_NUDGE_OBS:
        return cls(RoadClass::HIGHWAY) && end(RoadClass::HIGHWAY) && cmd(Command::KEEP) &&
               light(LightState::NONE) && m.obstacle_block && !m.ped_ahead &&
               !m.intersection_near && nudge();
      case ScenarioType::HIGHWAY_MERGE:
        return cls(RoadClass::HIGHWAY) && end(RoadClass::HIGHWAY) && cmd(Command::LC_LEFT) &&
               light(LightState::NONE) && no_actors && !m.intersection_near && m.lane_ends &&
               lc_left();
      case ScenarioType::HIGHWAY_EXIT:
        return cls(RoadClass::HIGHWAY) && end(RoadClass::MAINROAD) && cmd(Command::LC_RIGHT) &&
               light(LightState::NONE) && no_actors && !m.intersection_near && lc_right();
      case ScenarioType::MAINROAD_CRUISE:
        return cls(RoadClass::MAINROAD) && end(RoadClass::MAINROAD) && cmd(Command::KEEP) &&
               light(LightState::NONE) && no_actors && !m.lead_close && !m.ego_stopped &&
               !m.intersection_near && !m.lane_ends;
      case ScenarioType::MAINROAD_LC_LEFT:
        return cls(RoadClass::MAINROAD) && end(RoadClass::MAINROAD) && cmd(Command::LC_LEFT) &&
               light(LightState::NONE) && no_actors && !m.intersection_near && !m.lane_ends &&
               lc_left();
      case ScenarioType::MAINROAD_LC_RIGHT:
        return cls(RoadClass::MAINROAD) && end(RoadClass::MAINROAD) && cmd(Command::LC_RIGHT) &&
               light(LightState::NONE) && no_actors && !m.intersection_near && !m.lane_ends &&
               lc_right();
      case ScenarioType::MAINROAD_NUDGE_OBS:
        return cls(RoadClass::MAINROAD) && end(RoadClass::MAINROAD) && cmd(Command::KEEP) &&
               light(LightState::NONE) && m.obstacle_block && !m.ped_ahead &&
               !m.intersection_near && nudge();
      case ScenarioType::SUBROAD_CRUISE:
        return cls(RoadClass::SUBROAD) && end(RoadClass::SUBROAD) && cmd(Command::KEEP) &&
               light(LightState::NONE) && no_actors && !m.lead_close && !m.ego_stopped &&
               !m.intersection_near;
      case ScenarioType::SUBROAD_NUDGE_OBS:
        return cls(RoadClass::SUBROAD) && end(RoadClass::SUBROAD) && cmd(Command::KEEP) &&
               light(LightState::NONE) && m.obstacle_block && !m.ped_ahead &&
               !m.intersection_near && nudge();
      case ScenarioType::DOWN_SUBROAD_LC:
        return cls(RoadClass::MAINROAD) && end(RoadClass::SUBROAD) && cmd(Command::LC_RIGHT) &&
               light(LightState::NONE) && no_actors && !m.intersection_near && lc_right();
      case ScenarioType::SUBROAD_TO_MAINROAD_HIGHWAY:
        return cls(RoadClass::SUBROAD) &&
               (end(RoadClass::MAINROAD) || end(RoadClass::HIGHWAY)) && cmd(Command::KEEP) &&
               light(LightState::NONE) && no_actors && !m.intersection_near;
      case ScenarioType::MAINROAD_TO_SUBROAD:
        return cls(RoadClass::MAINROAD) && end(RoadClass::SUBROAD) && cmd(Command::KEEP) &&
               light(LightState::NONE) && no_actors && !m.intersection_near;
      case ScenarioType::TURN_LEFT:
        return cmd(Command::TURN_LEFT) && !light(LightState::RED) && no_actors &&
               m.intersection_near && !m.lead_close && turn_left();
      case ScenarioType::TURN_RIGHT:
        return cmd(Command::TURN_RIGHT) && !light(LightState::RED) && no_actors &&
               m.intersection_near && !m.lead_close && turn_right();
      case ScenarioType::U_TURN:
        return cmd(Command::U_TURN) && !light(LightState::RED) && no_actors &&
               m.intersection_near && !m.lead_close && uturn();
      case ScenarioType::WAIT_TURN:
        return (cmd(Command::TURN_LEFT) || cmd(Command::TURN_RIGHT)) &&
               light(LightState::RED) && m.lead_close && !m.ped_ahead && m.intersection_near;
      case ScenarioType::STOP_RED_LIGHT:
        return cmd(Command::KEEP) && light(LightState::RED) && no_actors && !m.lead_close &&
               !m.ego_stopped && m.intersection_near && stops();
      case ScenarioType::START_GREEN_LIGHT:
        return cmd(Command::KEEP) && light(LightState::GREEN) && m.ego_stopped && no_actors &&
               m.intersection_near;
      case ScenarioType::YIELD_PEDESTRIAN:
        return cmd(Command::KEEP) && m.ped_ahead && !m.obstacle_block;
      case ScenarioType::INTERSECTION_STRAIGHT:
        return cmd(Command::KEEP) && !light(LightState::RED) && !m.ego_stopped && no_actors &&
               m.intersection_near && !m.lead_close;
      default:
        return false;
    }
  }
};
}  // namespace

ScenarioType classify_meta(const MetaInfo& meta, bool strict, const MiningConfig& cfg) {
  const Predicates p{meta, cfg};
  ScenarioType first_match = ScenarioType::AMBIGUOUS;
  int matches = 0;
  for (ScenarioType t : all_scenario_types()) {
    if (p.holds(t)) {
      if (matches == 0) first_match = t;
      ++matches;
    }
  }
  if (strict) return matches == 1 ? first_match : ScenarioType::AMBIGUOUS;
  return matches >= 1 ? first_match : ScenarioType::AMBIGUOUS;
}

ScenarioType classify(const Scene& scene, const Trajectory& future_ego_frame, bool strict,
                      const MiningConfig& cfg) {
  return classify_meta(extract_meta(scene, future_ego_frame, cfg), strict, cfg);
}

double Distribution::fraction(ScenarioType t) const {
  if (total == 0) return 0.0;
  auto it = counts.find(t);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

Distribution distribution(const std::vector<Demonstration>& demos) {
  Distribution d;
  for (const Demonstration& demo : demos) {
    const ScenarioType t =
        demo.scene.scenario_label ? *demo.scene.scenario_label : ScenarioType::AMBIGUOUS;
    ++d.counts[t];
  }
  d.total = static_cast<std::int64_t>(demos.size());
  return d;
}

std::map<ScenarioType, std::int64_t> plan_downsample(
    const std::map<ScenarioType, std::int64_t>& counts, std::int64_t target_n) {
  std::int64_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  if (target_n > total) {
    throw std::invalid_argument("downsample: target " + std::to_string(target_n) +
                                " exceeds dataset size " + std::to_string(total));
  }
  std::map<ScenarioType, std::int64_t> out;
  std::vector<std::pair<ScenarioType, double>> fracs;
  std::int64_t assigned = 0;
  for (const auto& [t, c] : counts) {
    const double quota = static_cast<double>(c) * static_cast<double>(target_n) /
                         static_cast<double>(total);
    const std::int64_t base = static_cast<std::int64_t>(std::floor(quota + 1e-9));
    out[t] = base;
    assigned += base;
    fracs.emplace_back(t, quota - static_cast<double>(base));
  }
  std::stable_sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;  // largest remainder first; ties keep type order
  });
  std::int64_t remaining = target_n - assigned;
  for (const auto& [t, _] : fracs) {
    if (remaining <= 0) break;
    if (out[t] < counts.at(t)) {
      ++out[t];
      --remaining;
    }
  }
  return out;
}

std::map<ScenarioType, std::int64_t> plan_rebalance(
    const std::map<ScenarioType, std::int64_t>& counts, ScenarioType type, double multiplier,
    bool keep_total) {
  if (multiplier < 1.0) throw std::invalid_argument("rebalance: multiplier must be >= 1");
  auto it = counts.find(type);
  if (it == counts.end() || it->second == 0) {
    throw std::invalid_argument("rebalance: base dataset has no records of " + to_string(type));
  }
  std::int64_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  const std::int64_t boosted =
      static_cast<std::int64_t>(std::llround(static_cast<double>(it->second) * multiplier));

  std::map<ScenarioType, std::int64_t> out;
  if (keep_total) {
    std::map<ScenarioType, std::int64_t> others = counts;
    others.erase(type);
    out = plan_downsample(others, total - boosted);
  } else {
    out = counts;
  }
  out[type] = boosted;
  return out;
}

namespace {
std::map<ScenarioType, std::vector<std::size_t>> group_by_type(
    const std::vector<Demonstration>& demos) {
  std::map<ScenarioType, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const ScenarioType t =
        demos[i].scene.scenario_label ? *demos[i].scene.scenario_label : ScenarioType::AMBIGUOUS;
    groups[t].push_back(i);
  }
  return groups;
}

std::vector<Demonstration> take_counts(const std::vector<Demonstration>& demos,
                                       const std::map<ScenarioType, std::int64_t>& want) {
  const auto groups = group_by_type(demos);
  std::vector<Demonstration> out;
  for (ScenarioType t : all_scenario_types()) {
    auto w = want.find(t);
    if (w == want.end() || w->second == 0) continue;
    auto g = groups.find(t);
    const std::int64_t have = g == groups.end() ? 0 : static_cast<std::int64_t>(g->second.size());
    if (have < w->second) {
      throw std::invalid_argument("insufficient records of " + to_string(t) + ": need " +
                                  std::to_string(w->second) + ", have " + std::to_string(have));
    }
    for (std::int64_t k = 0; k < w->second; ++k) {
      out.push_back(demos[g->second[static_cast<std::size_t>(k)]]);
    }
  }
  return out;
}
}  // namespace

std::vector<Demonstration> downsample_uniform(const std::vector<Demonstration>& demos,
                                              std::int64_t target_n, std::uint64_t seed) {
  (void)seed;
  const Distribution d = distribution(demos);
  return take_counts(demos, plan_downsample(d.counts, target_n));
}

std::vector<Demonstration> take_by_counts(const std::vector<Demonstration>& demos,
                                          const std::map<ScenarioType, std::int64_t>& counts) {
  return take_counts(demos, counts);
}

std::vector<Demonstration> rebalance(const std::vector<Demonstration>& base,
                                     const std::vector<Demonstration>& pool, ScenarioType type,
                                     double multiplier, bool keep_total, std::uint64_t seed) {
  (void)seed;
  const Distribution d = distribution(base);
  const auto want = plan_rebalance(d.counts, type, multiplier, keep_total);

  // The boosted type is drawn from the pool prefix; the rest from the base.
  auto want_others = want;
  const std::int64_t boosted = want.at(type);
  want_others.erase(type);
  std::vector<Demonstration> out = take_counts(base, want_others);
  std::map<ScenarioType, std::int64_t> boost_want;
  boost_want[type] = boosted;
  std::vector<Demonstration> boosted_records = take_counts(pool, boost_want);

  // Canonical order: type enum order, generation order within type.
  std::vector<Demonstration> merged;
  merged.reserve(out.size() + boosted_records.size());
  std::size_t oi = 0;
  for (ScenarioType t : all_scenario_types()) {
    if (t == type) {
      for (auto& d2 : boosted_records) merged.push_back(std::move(d2));
    } else {
      while (oi < out.size() && out[oi].scene.scenario_label == t) {
        merged.push_back(std::move(out[oi]));
        ++oi;
      }
    }
  }
  return merged;
}

std::string distribution_csv(const Distribution& dist) {
  std::string out = "type,count,fraction\n";
  char buf[64];
  for (ScenarioType t : all_scenario_types()) {
    auto it = dist.counts.find(t);
    const std::int64_t c = it == dist.counts.end() ? 0 : it->second;
    std::snprintf(buf, sizeof(buf), ",%lld,%.6f\n", static_cast<long long>(c), dist.fraction(t));
    out += to_string(t) + buf;
  }
  return out;
}

std::string distribution_svg(const Distribution& dist) {
  const int width = 960, height = 420, margin_l = 60, margin_b = 150, margin_t = 20;
  std::int64_t max_count = 1;
  for (const auto& [_, c] : dist.counts) max_count = std::max(max_count, c);
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(width) + "\" height=\"" + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double plot_w = width - margin_l - 20;
  const double plot_h = height - margin_t - margin_b;
  const double bar_w = plot_w / kNumScenarioTypes;
  int i = 0;
  char buf[256];
  for (ScenarioType t : all_scenario_types()) {
    auto it = dist.counts.find(t);
    const std::int64_t c = it == dist.counts.end() ? 0 : it->second;
    const double h = plot_h * static_cast<double>(c) / static_cast<double>(max_count);
    const double x = margin_l + i * bar_w;
    const double y = margin_t + plot_h - h;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"#4878a8\"/>\n",
                  x + 1.0, y, bar_w - 2.0, h);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%d\" font-size=\"9\" text-anchor=\"end\" "
                  "transform=\"rotate(-60 %.1f %d)\">%s</text>\n",
                  x + bar_w / 2.0, height - margin_b + 12, x + bar_w / 2.0,
                  height - margin_b + 12, to_string(t).c_str());
    svg += buf;
    ++i;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"12\">count (max %lld)</text>\n", margin_l,
                margin_t - 5 + 12, static_cast<long long>(max_count));
  svg += buf;
  svg += "</svg>\n";
  return svg;
}

}  // namespace drivelab
