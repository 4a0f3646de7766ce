#include "drivelab/openloop.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "drivelab/policy.hpp"

namespace drivelab {

OpenLoopReport evaluate_open_loop(const ModelConfig& cfg, const ModelParams& params,
                                  const std::vector<Demonstration>& demos,
                                  std::optional<double> normalization) {
  if (demos.empty()) throw std::invalid_argument("open-loop evaluation: empty dataset");

  std::vector<std::size_t> order(demos.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return demos[a].scene.scene_id < demos[b].scene.scene_id;
  });

  std::vector<double> ades(demos.size(), 0.0);
  std::vector<ScenarioType> types(demos.size(), ScenarioType::AMBIGUOUS);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(order.size()); ++k) {
    const Demonstration& demo = demos[order[static_cast<std::size_t>(k)]];
    const Trajectory pred = plan(cfg, params, demo.scene);
    ades[static_cast<std::size_t>(k)] = ade(pred, demo.expert_future);
    types[static_cast<std::size_t>(k)] = classify(demo.scene, demo.expert_future, true);
  }

  OpenLoopReport report;
  report.normalization_constant = normalization;
  std::map<ScenarioType, std::pair<std::int64_t, double>> acc;
  double total = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    total += ades[k];
    auto& [count, sum] = acc[types[k]];
    ++count;
    sum += ades[k];
  }
  report.count = static_cast<std::int64_t>(demos.size());
  report.overall_ade = total / static_cast<double>(demos.size());
  for (const auto& [type, cs] : acc) {
    OpenLoopReport::TypeRow row{cs.first, cs.second / static_cast<double>(cs.first)};
    if (type == ScenarioType::AMBIGUOUS) {
      report.ambiguous = row;
    } else {
      report.per_type[type] = row;
    }
  }
  return report;
}

std::string open_loop_csv(const OpenLoopReport& report) {
  std::string out = "scope,type,count,ade\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "overall,,%lld,%.9g\n", static_cast<long long>(report.count),
                report.overall_ade);
  out += buf;
  for (const auto& [type, row] : report.per_type) {
    std::snprintf(buf, sizeof(buf), ",%lld,%.9g\n", static_cast<long long>(row.count),
                  row.mean_ade);
    out += "type," + to_string(type) + buf;
  }
  if (report.ambiguous.count > 0) {
    std::snprintf(buf, sizeof(buf), "type,AMBIGUOUS,%lld,%.9g\n",
                  static_cast<long long>(report.ambiguous.count), report.ambiguous.mean_ade);
    out += buf;
  }
  if (report.normalization_constant) {
    std::snprintf(buf, sizeof(buf), "normalized,,%lld,%.9g\n",
                  static_cast<long long>(report.count), report.normalized_overall());
    out += buf;
  }
  return out;
}

}  // namespace drivelab
