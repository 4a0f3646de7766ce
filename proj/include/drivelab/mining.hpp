#ifndef DRIVELAB_MINING_HPP
#define DRIVELAB_MINING_HPP

#include <map>
#include <vector>

#include "drivelab/scene.hpp"

namespace drivelab {

/// Threshold table for every classification predicate.
struct MiningConfig {
  double lc_fraction{0.8};            // lateral displacement as fraction of lane width
  double nudge_min_offset{0.5};       // m
  double lead_close_dist{15.0};       // m bumper gap
  double intersection_near{60.0};     // m
  double stopped_speed{0.5};          // m/s
  double turn_heading{0.87};          // rad (~50 deg)
  double uturn_heading{2.1};          // rad (~120 deg)
  double lane_end_window{100.0};      // m
  double obstacle_lat_margin{0.1};    // m beyond half lane width
  double ped_corridor_half{2.5};      // m
  double lead_corridor_half{1.8};     // m
};

/// Meta-information mined from a scene and its future trajectory: navigation,
/// static perception, dynamic perception, and ego status reduced to the
/// features the scenario predicates read.
struct MetaInfo {
  RoadClass start_class{RoadClass::MAINROAD};
  RoadClass end_class{RoadClass::MAINROAD};
  Command command{Command::KEEP};
  LightState light{LightState::NONE};
  bool obstacle_block{false};
  bool ped_ahead{false};
  bool lead_close{false};
  bool ego_stopped{false};
  bool intersection_near{false};
  bool lane_ends{false};
  double lane_width{3.5};
  double lat_disp_max{0.0};   // signed lateral vs ego-lane centerline, +left
  double lat_disp_min{0.0};
  double heading_change{0.0}; // net over the future, rad
  double min_future_speed{0.0};
};

MetaInfo extract_meta(const Scene& scene, const Trajectory& future_ego_frame,
                      const MiningConfig& config = {});

/// Deterministic rule-based label. In strict mode the label is AMBIGUOUS
/// unless exactly one type's predicates hold.
ScenarioType classify(const Scene& scene, const Trajectory& future_ego_frame, bool strict,
                      const MiningConfig& config = {});

ScenarioType classify_meta(const MetaInfo& meta, bool strict, const MiningConfig& config = {});

struct Distribution {
  std::map<ScenarioType, std::int64_t> counts;
  std::int64_t total{0};

  double fraction(ScenarioType t) const;
};

Distribution distribution(const std::vector<Demonstration>& demos);

/// Largest-remainder apportionment of `target_n` over per-type counts.
std::map<ScenarioType, std::int64_t> plan_downsample(
    const std::map<ScenarioType, std::int64_t>& counts, std::int64_t target_n);

/// Per-type target counts for a rebalance step. `keep_total` scales the other
/// types down so the total stays constant.
std::map<ScenarioType, std::int64_t> plan_rebalance(
    const std::map<ScenarioType, std::int64_t>& counts, ScenarioType type, double multiplier,
    bool keep_total);

/// Uniform per-type downsampling; selection is the per-type prefix of the
/// canonical (generation) order so ladders of sizes nest. The `seed` parameter
/// is kept for interface stability; prefix selection needs no randomness.
std::vector<Demonstration> downsample_uniform(const std::vector<Demonstration>& demos,
                                              std::int64_t target_n, std::uint64_t seed);

/// Per-type prefixes at explicit counts, emitted in canonical order.
std::vector<Demonstration> take_by_counts(const std::vector<Demonstration>& demos,
                                          const std::map<ScenarioType, std::int64_t>& counts);

/// Boost one type from a reserve pool. Throws if the pool lacks records.
std::vector<Demonstration> rebalance(const std::vector<Demonstration>& base,
                                     const std::vector<Demonstration>& pool, ScenarioType type,
                                     double multiplier, bool keep_total, std::uint64_t seed);

/// Histogram CSV (type,count,fraction) and a bar-chart SVG.
std::string distribution_csv(const Distribution& dist);
std::string distribution_svg(const Distribution& dist);

}  // namespace drivelab

#endif  // DRIVELAB_MINING_HPP
