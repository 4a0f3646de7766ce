#ifndef DRIVELAB_LAB_HPP
#define DRIVELAB_LAB_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drivelab/mining.hpp"
#include "drivelab/sim.hpp"
#include "drivelab/train.hpp"
#include "drivelab/worldgen.hpp"

namespace drivelab {

struct ScalingPoint {
  std::int64_t n{0};
  double value{0.0};
};

struct PowerLawFit {
  double a{0.0};  // coefficient
  double b{0.0};  // exponent
  double r{0.0};  // correlation of the log-log fit
};

/// OLS on (ln n, ln value): a = exp(intercept), b = slope, r = Pearson
/// correlation of the log pairs (0 for a constant curve). Throws on fewer
/// than 3 points or non-positive values.
PowerLawFit fit_power_law(const std::vector<ScalingPoint>& points);

struct ScalingExperimentConfig {
  std::vector<std::int64_t> sizes{250, 1000, 4000, 16000};
  std::uint64_t base_seed{7};
  std::int64_t eval_open_count{460};
  std::int64_t eval_closed_count{50};
  TrainConfig train;
  GenRanges ranges;
};

struct ScalingRow {
  std::int64_t n{0};
  double ade{0.0};
  double safety{0.0}, comfort{0.0}, rule{0.0}, efficiency{0.0}, navigation{0.0}, total{0.0};
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  PowerLawFit fit;
};

ScalingResult run_scaling_experiment(const ScalingExperimentConfig& config,
                                     const std::string& run_dir);

struct RebalanceExperimentConfig {
  std::int64_t total{4000};
  ScenarioType target{ScenarioType::DOWN_SUBROAD_LC};
  std::vector<double> multipliers{1.0, 2.0, 4.0};
  std::uint64_t base_seed{11};
  std::int64_t target_eval_count{100};
  std::int64_t others_eval_per_type{10};
  TrainConfig train;
  GenRanges ranges;
};

struct RebalanceRow {
  double multiplier{1.0};
  std::int64_t target_count{0};
  double target_count_delta_pct{0.0};
  double target_ade{0.0};
  double target_ade_delta_pct{0.0};
  double others_ade{0.0};
  double others_ade_delta_pct{0.0};
};

struct RebalanceResult {
  std::vector<RebalanceRow> rows;
};

RebalanceResult run_rebalance_experiment(const RebalanceExperimentConfig& config,
                                         const std::string& run_dir);

struct GeneralizationExperimentConfig {
  std::vector<std::int64_t> sizes{1000, 4000, 16000};
  std::uint64_t base_seed{13};
  std::vector<ScenarioType> heldout{ScenarioType::HIGHWAY_NUDGE_OBS, ScenarioType::WAIT_TURN};
  // Similar-type pairings: HIGHWAY_NUDGE_OBS ~ {MAINROAD_NUDGE_OBS, HIGHWAY_CRUISE},
  // WAIT_TURN ~ {STOP_RED_LIGHT, TURN_LEFT}.
  std::vector<ScenarioType> similar{ScenarioType::MAINROAD_NUDGE_OBS, ScenarioType::HIGHWAY_CRUISE,
                                    ScenarioType::STOP_RED_LIGHT, ScenarioType::TURN_LEFT};
  std::int64_t heldout_eval_per_type{60};
  std::int64_t similar_eval_per_type{30};
  bool run_control{true};
  TrainConfig train;
  GenRanges ranges;
};

struct GeneralizationRow {
  std::int64_t n{0};
  double heldout_ade{0.0};
  double similar_ade{0.0};
  double gap{0.0};
};

struct GeneralizationResult {
  std::vector<GeneralizationRow> rows;
  double control_heldout_ade{-1.0};  // 16k trained with held-out types included
};

GeneralizationResult run_generalization_experiment(const GeneralizationExperimentConfig& config,
                                                   const std::string& run_dir);

/// Re-execute an experiment from its manifest into `out_dir`; outputs are
/// byte-identical to the original run.
void run_from_manifest(const std::string& manifest_path, const std::string& out_dir);

/// Canonical per-type prefix subset of a canonical-order pool (indices).
std::vector<int> subset_indices(const std::vector<Demonstration>& pool, std::int64_t target_n);

}  // namespace drivelab

#endif  // DRIVELAB_LAB_HPP
