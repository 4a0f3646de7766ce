#ifndef DRIVELAB_WORLDGEN_HPP
#define DRIVELAB_WORLDGEN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drivelab/expert.hpp"
#include "drivelab/scene.hpp"
#include "drivelab/scene_io.hpp"

namespace drivelab {

/// Jitter ranges for scenario construction. Every range must be non-degenerate.
struct GenRanges {
  double width_jitter_lo{0.92}, width_jitter_hi{1.08};
  double speed_frac_lo{0.80}, speed_frac_hi{0.98};  // ego speed as fraction of limit
  double highway_limit_lo{22.0}, highway_limit_hi{30.0};
  double mainroad_limit_lo{10.5}, mainroad_limit_hi{15.0};
  double subroad_limit_lo{5.5}, subroad_limit_hi{8.0};
  double ambient_density{0.8};  // expected ambient vehicles in cruise-like scenes

  void validate() const;
};

struct GenSpec {
  std::map<ScenarioType, std::int64_t> counts;
  std::uint64_t seed{0};
  GenRanges ranges;

  std::int64_t total() const;
  void validate() const;
};

/// Deterministic scene construction. The returned scene classifies strictly to
/// `type`; infeasible draws are resampled from derived sub-seeds.
Scene generate_scene(ScenarioType type, std::uint64_t seed, const GenRanges& ranges = {});

struct GenReport {
  std::map<ScenarioType, std::int64_t> counts;
  std::map<ScenarioType, std::int64_t> rejected;  // closed-loop gate rejections
};

/// Build demonstrations for the spec, gate each on expert self-consistency
/// (closed-loop total >= 0.9, safety == 1), and write dataset + manifest.
GenReport generate_dataset(const GenSpec& spec, const std::string& dataset_path);

/// In-memory variant used by the experiment drivers.
std::vector<Demonstration> generate_demos(const GenSpec& spec, GenReport* report = nullptr);

/// Long-tail per-type counts summing exactly to `total` (largest remainder).
std::map<ScenarioType, std::int64_t> longtail_counts(std::int64_t total);
/// Balanced counts (equal shares, remainder to the first types).
std::map<ScenarioType, std::int64_t> balanced_counts(std::int64_t total);
/// Largest-remainder apportionment of `total` over arbitrary weights.
std::map<ScenarioType, std::int64_t> apportion_counts(
    const std::map<ScenarioType, std::int64_t>& weights, std::int64_t total);
/// The long-tail weight table (per mille), for deriving filtered profiles.
std::map<ScenarioType, std::int64_t> longtail_weights();

}  // namespace drivelab

#endif  // DRIVELAB_WORLDGEN_HPP
