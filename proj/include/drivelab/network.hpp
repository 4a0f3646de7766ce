#ifndef DRIVELAB_NETWORK_HPP
#define DRIVELAB_NETWORK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "drivelab/raster.hpp"

namespace drivelab {

/// Context vector layout fed alongside the raster: command one-hot (6),
/// light one-hot (3), speed/30, distance-to-intersection/200 clamped,
/// target road class one-hot (3).
inline constexpr int kContextDim = 14;

struct ModelConfig {
  RasterSpec raster;
  int pool{4};         // average pooling of the fused grid before the trunk
  int hidden{256};
  int gating_hidden{16};
  int modes{3};
  int plan_len{12};
  int agent_slots{8};

  int fused_channels() const { return (raster.queue_len + 1) * raster.channels; }
  int pooled_h() const { return raster.height / pool; }
  int pooled_w() const { return raster.width / pool; }
  int cells_per_channel() const { return pooled_h() * pooled_w(); }
  int raster_dim() const { return fused_channels() * cells_per_channel(); }
  int input_dim() const { return raster_dim() + kContextDim; }
  int plan_dim() const { return modes * plan_len * 2; }
  int occ_dim() const { return raster.height * raster.width; }
  int mot_dim() const { return agent_slots * 2; }

  void validate() const;
  std::string canonical_string() const;
  std::uint64_t hash() const;
};

struct ParamSegment {
  std::string name;
  std::size_t offset{0};
  std::size_t count{0};
};

struct ModelParams {
  std::uint64_t config_hash{0};
  std::uint64_t seed{0};
  std::uint64_t step{0};
  std::vector<ParamSegment> segments;
  std::vector<float> values;

  float* seg(const std::string& name);
  const float* seg(const std::string& name) const;
  std::size_t total() const { return values.size(); }
};

/// Parameter layout for a config (zero-initialized values).
ModelParams make_params(const ModelConfig& config);
/// Seeded init: weights ~ N(0, 1/sqrt(fan_in)), biases zero.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path, const ModelConfig& expected_config);

struct PlanModes {
  std::vector<double> offsets;      // [modes][plan_len][2], ego frame
  std::vector<double> confidences;  // softmax-normalized, size modes
};

struct ForwardOutputs {
  PlanModes plan;
  std::vector<float> occ_logits;
  std::vector<float> map_logits;
  std::vector<float> motion;  // [agent_slots][2]
};

/// Deterministic single-sample forward pass. `raster` has raster_dim()
/// entries, `context` kContextDim.
ForwardOutputs forward(const ModelConfig& config, const ModelParams& params, const float* raster,
                       const float* context);

struct SampleLabels {
  std::vector<float> plan;       // plan_len*2
  std::vector<float> occ;        // occ_dim in [0,1]
  std::vector<float> map;        // occ_dim in [0,1]
  std::vector<float> mot;        // agent_slots*2
  std::vector<float> mot_valid;  // agent_slots in {0,1}
};

struct LossWeights {
  double plan{1.0};
  double mot{1.0};
  double occ{1.0};
  double map{1.0};
};

struct LossBreakdown {
  double plan_l1{0.0};
  double plan_ce{0.0};
  double mot{0.0};
  double occ{0.0};
  double map{0.0};
  double total{0.0};
};

/// Scratch space reused across training steps.
struct Workspace {
  std::vector<float> x, h1, a1, h2, a2;
  std::vector<float> plan_out, conf_out, occ_out, map_out, mot_out;
  std::vector<float> d_h1, d_h2, d_plan, d_conf, d_occ, d_map, d_mot, d_x;
  std::vector<float> means, gate_h, gate_s;
};

/// Mean loss over the batch; if `grad` is non-null, accumulates the exact
/// reverse-mode gradient of that mean into it (grad must be zeroed by the
/// caller). Throws on non-finite loss.
LossBreakdown compute_batch(const ModelConfig& config, const ModelParams& params,
                            const float* raster_batch, const float* context_batch,
                            const SampleLabels* labels, int batch, const LossWeights& weights,
                            std::vector<float>* grad, Workspace& ws);

}  // namespace drivelab

#endif  // DRIVELAB_NETWORK_HPP
