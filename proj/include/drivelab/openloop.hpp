#ifndef DRIVELAB_OPENLOOP_HPP
#define DRIVELAB_OPENLOOP_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drivelab/mining.hpp"
#include "drivelab/network.hpp"
#include "drivelab/scene.hpp"

namespace drivelab {

struct OpenLoopReport {
  double overall_ade{0.0};
  std::int64_t count{0};
  struct TypeRow {
    std::int64_t count{0};
    double mean_ade{0.0};
  };
  std::map<ScenarioType, TypeRow> per_type;  // strict labels, AMBIGUOUS excluded
  TypeRow ambiguous;                          // counted in overall only
  std::optional<double> normalization_constant;

  double normalized_overall() const {
    return normalization_constant ? overall_ade / *normalization_constant : overall_ade;
  }
};

/// Top-confidence-mode ADE against expert futures, overall and per strict
/// scenario type. Aggregation runs in scene_id order, so results are
/// independent of the dataset's on-disk ordering.
OpenLoopReport evaluate_open_loop(const ModelConfig& config, const ModelParams& params,
                                  const std::vector<Demonstration>& demos,
                                  std::optional<double> normalization = std::nullopt);

std::string open_loop_csv(const OpenLoopReport& report);

}  // namespace drivelab

#endif  // DRIVELAB_OPENLOOP_HPP
