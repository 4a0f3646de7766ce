#ifndef DRIVELAB_POLICY_HPP
#define DRIVELAB_POLICY_HPP

#include "drivelab/network.hpp"
#include "drivelab/sim.hpp"
#include "drivelab/train.hpp"

namespace drivelab {

/// Trajectory from plan-head offsets: waypoints at 0.5..6.0 s, headings from
/// travel direction, speeds from segment lengths.
Trajectory trajectory_from_mode(const ModelConfig& config, const PlanModes& plan, int mode);

/// Index of the highest-confidence mode; ties break to the lowest index.
int argmax_confidence(const std::vector<double>& confidences);

/// One-shot plan for a scene at t = 0 (temporal queue filled from history).
/// Returns the highest-confidence mode.
Trajectory plan(const ModelConfig& config, const ModelParams& params, const Scene& scene);

/// Closed-loop policy: maintains the temporal FIFO across replans, rasterizes
/// the live ego state, and returns the top-confidence trajectory.
PolicyFn make_neural_policy(const ModelConfig& config, const ModelParams& params,
                            const Scene& scene);

}  // namespace drivelab

#endif  // DRIVELAB_POLICY_HPP
