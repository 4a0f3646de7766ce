#include "drivelab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace drivelab {

int argmax_confidence(const std::vector<double>& confidences) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(confidences.size()); ++i) {
    if (confidences[i] > confidences[best] + 1e-12) best = i;
  }
  return best;
}

Trajectory trajectory_from_mode(const ModelConfig& cfg, const PlanModes& plan, int mode) {
  Trajectory out;
  out.sample_rate_hz = kPlanRateHz;
  const int coords = cfg.plan_len * 2;
  const double dt = 1.0 / kPlanRateHz;
  Vec2 prev{0.0, 0.0};
  for (int k = 0; k < cfg.plan_len; ++k) {
    const Vec2 p{plan.offsets[mode * coords + k * 2 + 0], plan.offsets[mode * coords + k * 2 + 1]};
    Waypoint wp;
    wp.t = (k + 1) * dt;
    const Vec2 d = p - prev;
    wp.pose = {p.x, p.y, d.norm() > 1e-6 ? std::atan2(d.y, d.x) : 0.0};
    wp.speed = d.norm() / dt;
    out.waypoints.push_back(wp);
    prev = p;
  }
  return out;
}

Trajectory plan(const ModelConfig& cfg, const ModelParams& params, const Scene& scene) {
  std::vector<float> raster, context;
  build_scene_input(scene, cfg, &raster, &context);
  const ForwardOutputs out = forward(cfg, params, raster.data(), context.data());
  return trajectory_from_mode(cfg, out.plan, argmax_confidence(out.plan.confidences));
}

namespace {

std::uint8_t quantize_u8(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

struct NeuralPolicyState {
  ModelConfig config;
  const ModelParams* params;
  TemporalQueue queue;

  NeuralPolicyState(const ModelConfig& cfg, const ModelParams& p, const Scene& scene)
      : config(cfg), params(&p), queue(cfg.raster.queue_len) {
    // Warm start from the recorded history at the replanning cadence.
    for (int k = cfg.raster.queue_len; k >= 1; --k) {
      const double t = -0.5 * k;
      queue.push(rasterize(scene, t, cfg.raster), scene.history_pose_at(t));
    }
  }

  Trajectory operator()(const PlanInput& input) {
    const RasterSpec& spec = config.raster;
    const BevRaster current =
        rasterize(*input.scene, input.t_now, input.ego_pose, input.ego_speed, spec);
    const auto fused = temporal_fuse(queue, current, input.ego_pose, spec);
    const auto pooled =
        avg_pool(fused, config.fused_channels(), spec.height, spec.width, config.pool);
    std::vector<float> raster(pooled.size());
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      raster[i] = static_cast<float>(quantize_u8(pooled[i])) / 255.0f;
    }
    std::vector<float> context(kContextDim, 0.0f);
    build_context(*input.scene, input.t_now, input.ego_speed, context.data());

    const ForwardOutputs out = forward(config, *params, raster.data(), context.data());
    queue.push(current, input.ego_pose);
    return trajectory_from_mode(config, out.plan, argmax_confidence(out.plan.confidences));
  }
};

}  // namespace

PolicyFn make_neural_policy(const ModelConfig& config, const ModelParams& params,
                            const Scene& scene) {
  auto state = std::make_shared<NeuralPolicyState>(config, params, scene);
  return [state](const PlanInput& input) { return (*state)(input); };
}

}  // namespace drivelab
