#ifndef DRIVELAB_TRAIN_HPP
#define DRIVELAB_TRAIN_HPP

#include <functional>
#include <string>
#include <vector>

#include "drivelab/network.hpp"
#include "drivelab/scene.hpp"

namespace drivelab {

struct TrainConfig {
  double lr{2e-4};
  double weight_decay{1e-4};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  int batch_size{8};
  std::int64_t steps{0};  // 0 = auto: max(2000, 4 * N)
  std::uint64_t seed{1};
  LossWeights loss_weights;
  int log_every{250};
  ModelConfig model;

  std::int64_t effective_steps(std::int64_t n) const {
    return steps > 0 ? steps : std::max<std::int64_t>(2000, 4 * n);
  }
  void validate() const;
};

double cosine_lr(double base, std::int64_t step, std::int64_t total_steps);

/// Precomputed model inputs and labels for a dataset. Raster inputs are
/// quantized to u8 so large pools stay in memory; the same quantization is
/// applied at inference time for train/eval consistency.
class FeatureCache {
 public:
  static FeatureCache build(const std::vector<Demonstration>& demos, const ModelConfig& config);

  int size() const { return n_; }
  const ModelConfig& config() const { return config_; }

  /// Dequantize sample `i` into float buffers (raster_dim and kContextDim).
  void fill_input(int i, float* raster, float* context) const;
  SampleLabels labels(int i) const;
  /// Expert future of record i (ego frame), for ADE evaluation.
  const Trajectory& expert_future(int i) const { return futures_[i]; }

 private:
  ModelConfig config_;
  int n_{0};
  std::vector<std::uint8_t> raster_;
  std::vector<float> context_;
  std::vector<float> plan_;
  std::vector<std::uint8_t> occ_;
  std::vector<std::uint8_t> map_;
  std::vector<float> mot_;
  std::vector<float> mot_valid_;
  std::vector<Trajectory> futures_;
};

/// Model input for a single scene at its current time (queue built from the
/// recorded history), quantized exactly like cached training inputs.
void build_scene_input(const Scene& scene, const ModelConfig& config, std::vector<float>* raster,
                       std::vector<float>* context);

/// Context vector assembly shared by training, evaluation, and closed loop.
void build_context(const Scene& scene, double t, double ego_speed, float* out);

struct CurveRow {
  std::int64_t step{0};
  double lr{0.0};
  LossBreakdown loss;
  double eval_metric{-1.0};  // held-out ADE when an eval callback is set
};

struct TrainResult {
  ModelParams params;
  std::vector<CurveRow> curve;
};

std::string curve_csv(const std::vector<CurveRow>& curve);

/// Deterministic Adam training with decoupled weight decay and a cosine
/// schedule. `indices` selects the training subset of `cache`. The optional
/// eval callback runs once per epoch. Throws on divergence (loss > 1e6 or
/// non-finite).
TrainResult train(const FeatureCache& cache, const std::vector<int>& indices,
                  const TrainConfig& config,
                  const std::function<double(const ModelParams&)>& eval_fn = nullptr);

}  // namespace drivelab

#endif  // DRIVELAB_TRAIN_HPP
