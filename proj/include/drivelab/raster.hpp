#ifndef DRIVELAB_RASTER_HPP
#define DRIVELAB_RASTER_HPP

#include <deque>
#include <vector>

#include "drivelab/scene.hpp"

namespace drivelab {

/// Channel roles of a BEV raster.
enum RasterChannel {
  kChDrivable = 0,
  kChLaneCenter,
  kChDividerSolid,
  kChAgentsNow,
  kChAgentsPast,
  kChRoute,
  kChRedStop,
  kChSpeed,
};

struct RasterSpec {
  int channels{8};
  int height{64};      // longitudinal cells (+x forward)
  int width{32};       // lateral cells (+y left)
  double resolution{1.5};
  int anchor_x{16};    // ego cell
  int anchor_y{16};
  int queue_len{4};
  double max_speed{30.0};

  int cells() const { return height * width; }
  void validate() const;
};

struct BevRaster {
  int channels{0};
  int height{0};
  int width{0};
  std::vector<float> data;  // [c][ix][iy]

  BevRaster() = default;
  BevRaster(int c, int h, int w) : channels(c), height(h), width(w), data(c * h * w, 0.0f) {}

  float& at(int c, int ix, int iy) { return data[(c * height + ix) * width + iy]; }
  float at(int c, int ix, int iy) const { return data[(c * height + ix) * width + iy]; }
};

/// Rasterize ground-truth scene state at time `t` into the ego frame given by
/// `frame_pose`; `ego_speed` fills the speed channel. Agent and light state
/// are sampled at `t`.
BevRaster rasterize(const Scene& scene, double t, const Pose2& frame_pose, double ego_speed,
                    const RasterSpec& spec);

/// Ego state taken from the recorded history (valid for t in [-1.9, 0]).
BevRaster rasterize(const Scene& scene, double t, const RasterSpec& spec);

/// FIFO of past rasters with their capture poses; oldest first.
class TemporalQueue {
 public:
  explicit TemporalQueue(int capacity) : capacity_(capacity) {}

  void push(BevRaster raster, const Pose2& pose);
  int size() const { return static_cast<int>(entries_.size()); }
  int capacity() const { return capacity_; }
  const std::pair<BevRaster, Pose2>& entry(int i) const { return entries_[i]; }

 private:
  int capacity_;
  std::deque<std::pair<BevRaster, Pose2>> entries_;
};

/// Warp every queued raster into the current frame (nearest neighbor, zeros
/// outside) and concatenate along channels: slot 0 is the current raster,
/// slots 1..K the past frames oldest-first, right-aligned so a partially
/// filled queue leaves the oldest slots zero.
std::vector<float> temporal_fuse(const TemporalQueue& queue, const BevRaster& current,
                                 const Pose2& current_pose, const RasterSpec& spec);

/// Block-average pooling of a fused grid. H and W must divide by `pool`.
std::vector<float> avg_pool(const std::vector<float>& fused, int channels, int height, int width,
                            int pool);

}  // namespace drivelab

#endif  // DRIVELAB_RASTER_HPP
