#ifndef DRIVELAB_CONFIG_HPP
#define DRIVELAB_CONFIG_HPP

#include <string>

#include <json.hpp>

#include "drivelab/lab.hpp"
#include "drivelab/sim.hpp"

namespace drivelab {

using OrderedJson = nlohmann::ordered_json;

/// Effective configuration of a CLI run: a single seed, generation ranges,
/// and per-stage sections. All numeric parameters live here; flags only
/// override fields.
struct RunConfig {
  std::uint64_t seed{1};
  GenRanges ranges;
  struct GenSection {
    std::string profile{"longtail"};  // longtail | balanced | explicit
    std::int64_t total{1000};
    std::map<ScenarioType, std::int64_t> counts;  // used when profile == explicit
  } gen;
  TrainConfig train;
  SimConfig sim;
  ScalingExperimentConfig scaling;
  RebalanceExperimentConfig rebalance;
  GeneralizationExperimentConfig generalization;
};

OrderedJson to_json(const GenRanges& v);
OrderedJson to_json(const ModelConfig& v);
OrderedJson to_json(const TrainConfig& v);
OrderedJson to_json(const SimConfig& v);
OrderedJson to_json(const ScalingExperimentConfig& v);
OrderedJson to_json(const RebalanceExperimentConfig& v);
OrderedJson to_json(const GeneralizationExperimentConfig& v);
OrderedJson to_json(const RunConfig& v);

/// Parsers reject unknown keys and report dotted field paths. Missing keys
/// keep their defaults.
void from_json(const nlohmann::json& j, const std::string& path, GenRanges* v);
void from_json(const nlohmann::json& j, const std::string& path, ModelConfig* v);
void from_json(const nlohmann::json& j, const std::string& path, TrainConfig* v);
void from_json(const nlohmann::json& j, const std::string& path, SimConfig* v);
void from_json(const nlohmann::json& j, const std::string& path, ScalingExperimentConfig* v);
void from_json(const nlohmann::json& j, const std::string& path, RebalanceExperimentConfig* v);
void from_json(const nlohmann::json& j, const std::string& path, GeneralizationExperimentConfig* v);

RunConfig parse_run_config(const std::string& json_text);
std::string dump_run_config(const RunConfig& config);

}  // namespace drivelab

#endif  // DRIVELAB_CONFIG_HPP
