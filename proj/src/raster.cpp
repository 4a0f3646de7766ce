#include "drivelab/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drivelab {

void RasterSpec::validate() const {
  if (channels != 8) throw std::invalid_argument("raster: channel roles are fixed at 8");
  if (height <= 0 || width <= 0 || resolution <= 0.0) {
    throw std::invalid_argument("raster: non-positive dimensions");
  }
  if (anchor_x < 0 || anchor_x >= height || anchor_y < 0 || anchor_y >= width) {
    throw std::invalid_argument("raster: anchor outside grid");
  }
  if (queue_len < 0) throw std::invalid_argument("raster: negative queue length");
}

namespace {

struct Grid {
  const RasterSpec& spec;
  const Pose2& frame;

  bool cell_of(const Vec2& local, int& ix, int& iy) const {
    ix = static_cast<int>(std::floor(local.x / spec.resolution)) + spec.anchor_x;
    iy = static_cast<int>(std::floor(local.y / spec.resolution)) + spec.anchor_y;
    return ix >= 0 && ix < spec.height && iy >= 0 && iy < spec.width;
  }

  Vec2 center_local(int ix, int iy) const {
    return {(ix - spec.anchor_x + 0.5) * spec.resolution,
            (iy - spec.anchor_y + 0.5) * spec.resolution};
  }
};

void stamp_polyline(BevRaster& r, int channel, float value, const std::vector<Vec2>& pts,
                    const Grid& g) {
  const double step = g.spec.resolution * 0.45;
  const double half_x = (g.spec.height + 1) * g.spec.resolution;
  const double half_y = (g.spec.width + 1) * g.spec.resolution;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = g.frame.to_local(pts[i]);
    const Vec2 b = g.frame.to_local(pts[i + 1]);
    if ((a.x < -half_x && b.x < -half_x) || (a.x > half_x && b.x > half_x) ||
        (a.y < -half_y && b.y < -half_y) || (a.y > half_y && b.y > half_y)) {
      continue;
    }
    const double len = dist(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 0; k <= n; ++k) {
      const Vec2 p = a + (b - a) * (static_cast<double>(k) / n);
      int ix, iy;
      if (g.cell_of(p, ix, iy)) {
        r.at(channel, ix, iy) = std::max(r.at(channel, ix, iy), value);
      }
    }
  }
}

void stamp_box(BevRaster& r, int channel, float value, const OrientedBox& box, const Grid& g) {
  // Bounding cells of the box in the local frame, then exact containment.
  const auto corners = box.corners();
  double xmin = 1e18, xmax = -1e18, ymin = 1e18, ymax = -1e18;
  for (const Vec2& c : corners) {
    const Vec2 l = g.frame.to_local(c);
    xmin = std::min(xmin, l.x);
    xmax = std::max(xmax, l.x);
    ymin = std::min(ymin, l.y);
    ymax = std::max(ymax, l.y);
  }
  const int ix0 = std::max(0, static_cast<int>(std::floor(xmin / g.spec.resolution)) + g.spec.anchor_x);
  const int ix1 = std::min(g.spec.height - 1,
                           static_cast<int>(std::floor(xmax / g.spec.resolution)) + g.spec.anchor_x);
  const int iy0 = std::max(0, static_cast<int>(std::floor(ymin / g.spec.resolution)) + g.spec.anchor_y);
  const int iy1 = std::min(g.spec.width - 1,
                           static_cast<int>(std::floor(ymax / g.spec.resolution)) + g.spec.anchor_y);
  for (int ix = ix0; ix <= ix1; ++ix) {
    for (int iy = iy0; iy <= iy1; ++iy) {
      const Vec2 world = g.frame.to_world(g.center_local(ix, iy));
      if (box.contains(world)) {
        r.at(channel, ix, iy) = std::max(r.at(channel, ix, iy), value);
      }
    }
  }
}

/// Lane centerline offset to one edge (+1 left, -1 right of travel).
std::vector<Vec2> lane_edge_pts(const LaneSegment& lane, int side) {
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

}  // namespace

BevRaster rasterize(const Scene& scene, double t, const Pose2& frame_pose, double ego_speed,
                    const RasterSpec& spec) {
  BevRaster r(spec.channels, spec.height, spec.width);
  const Grid g{spec, frame_pose};

  // Drivable area: cell center inside any drivable polygon.
  for (int ix = 0; ix < spec.height; ++ix) {
    for (int iy = 0; iy < spec.width; ++iy) {
      const Vec2 world = frame_pose.to_world(g.center_local(ix, iy));
      if (scene.road_map.in_drivable(world)) r.at(kChDrivable, ix, iy) = 1.0f;
    }
  }

  // Lane centerlines carry a normalized speed-limit intensity so the policy
  // can read how fast each lane is meant to be driven.
  for (const LaneSegment& lane : scene.road_map.lanes) {
    const float intensity =
        0.25f + 0.75f * static_cast<float>(std::min(1.0, lane.speed_limit / 33.0));
    stamp_polyline(r, kChLaneCenter, intensity, lane.centerline, g);
    if (lane.left_divider == DividerStyle::SOLID) {
      stamp_polyline(r, kChDividerSolid, 1.0f, lane_edge_pts(lane, +1), g);
    }
    if (lane.right_divider == DividerStyle::SOLID) {
      stamp_polyline(r, kChDividerSolid, 1.0f, lane_edge_pts(lane, -1), g);
    }
  }

  for (const AgentTrack& agent : scene.agents) {
    stamp_box(r, kChAgentsNow, 1.0f, agent.box_at(t), g);
    stamp_box(r, kChAgentsPast, 1.0f, agent.box_at(t - 0.5), g);
    stamp_box(r, kChAgentsPast, 0.5f, agent.box_at(t - 1.0), g);
  }

  stamp_polyline(r, kChRoute, 1.0f, scene.nav.route, g);

  const int sl_id = scene.traffic_light.stop_line_id;
  if (sl_id >= 0 && sl_id < static_cast<int>(scene.road_map.stop_lines.size()) &&
      scene.traffic_light.state_at(t) == LightState::RED) {
    const StopLine& sl = scene.road_map.stop_lines[sl_id];
    const Vec2 mid = (sl.a + sl.b) * 0.5;
    const Vec2 along = sl.b - sl.a;
    const double len = along.norm();
    if (len > 1e-9) {
      const OrientedBox band{mid, std::atan2(along.y, along.x), len / 2.0, 1.5};
      stamp_box(r, kChRedStop, 1.0f, band, g);
    }
  }

  const float v = static_cast<float>(std::clamp(ego_speed / spec.max_speed, 0.0, 1.0));
  for (int ix = 0; ix < spec.height; ++ix) {
    for (int iy = 0; iy < spec.width; ++iy) r.at(kChSpeed, ix, iy) = v;
  }
  return r;
}

BevRaster rasterize(const Scene& scene, double t, const RasterSpec& spec) {
  return rasterize(scene, t, scene.history_pose_at(t), scene.history_speed_at(t), spec);
}

void TemporalQueue::push(BevRaster raster, const Pose2& pose) {
  entries_.emplace_back(std::move(raster), pose);
  while (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
}

std::vector<float> temporal_fuse(const TemporalQueue& queue, const BevRaster& current,
                                 const Pose2& current_pose, const RasterSpec& spec) {
  const int c = current.channels;
  const int h = current.height;
  const int w = current.width;
  const int slots = queue.capacity() + 1;
  std::vector<float> fused(static_cast<std::size_t>(slots) * c * h * w, 0.0f);

  std::copy(current.data.begin(), current.data.end(), fused.begin());

  const Grid g{spec, current_pose};
  for (int qi = 0; qi < queue.size(); ++qi) {
    const auto& [past, past_pose] = queue.entry(qi);
    // Right-align: the newest entry lands in the last slot.
    const int slot = queue.capacity() - queue.size() + qi + 1;
    float* dst = fused.data() + static_cast<std::size_t>(slot) * c * h * w;
    for (int ix = 0; ix < h; ++ix) {
      for (int iy = 0; iy < w; ++iy) {
        // Target cell center in the current frame -> same world point in the
        // past frame -> nearest past cell.
        const Vec2 world = current_pose.to_world(g.center_local(ix, iy));
        const Vec2 local_past = past_pose.to_local(world);
        const int px = static_cast<int>(std::floor(local_past.x / spec.resolution)) + spec.anchor_x;
        const int py = static_cast<int>(std::floor(local_past.y / spec.resolution)) + spec.anchor_y;
        if (px < 0 || px >= h || py < 0 || py >= w) continue;
        for (int ch = 0; ch < c; ++ch) {
          dst[(ch * h + ix) * w + iy] = past.at(ch, px, py);
        }
      }
    }
  }
  return fused;
}

std::vector<float> avg_pool(const std::vector<float>& fused, int channels, int height, int width,
                            int pool) {
  if (height % pool != 0 || width % pool != 0) {
    throw std::invalid_argument("avg_pool: dimensions must divide by pool factor");
  }
  const int ph = height / pool, pw = width / pool;
  std::vector<float> out(static_cast<std::size_t>(channels) * ph * pw, 0.0f);
  const float inv = 1.0f / static_cast<float>(pool * pool);
  for (int c = 0; c < channels; ++c) {
    for (int ix = 0; ix < ph; ++ix) {
      for (int iy = 0; iy < pw; ++iy) {
        float acc = 0.0f;
        for (int dx = 0; dx < pool; ++dx) {
          for (int dy = 0; dy < pool; ++dy) {
            acc += fused[(static_cast<std::size_t>(c) * height + ix * pool + dx) * width +
                         iy * pool + dy];
          }
        }
        out[(static_cast<std::size_t>(c) * ph + ix) * pw + iy] = acc * inv;
      }
    }
  }
  return out;
}

}  // namespace drivelab
