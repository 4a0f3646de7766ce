#include "drivelab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "drivelab/config.hpp"
#include "drivelab/openloop.hpp"
#include "drivelab/policy.hpp"
#include "drivelab/report.hpp"
#include "drivelab/rng.hpp"
#include "drivelab/scene_io.hpp"

namespace drivelab {

namespace fs = std::filesystem;

PowerLawFit fit_power_law(const std::vector<ScalingPoint>& points) {
  if (points.size() < 3) {
    throw std::invalid_argument("power-law fit needs at least 3 points");
  }
  std::vector<double> lx, ly;
  for (const ScalingPoint& p : points) {
    if (p.n <= 0 || p.value <= 0.0) {
      throw std::invalid_argument("power-law fit requires positive n and values");
    }
    lx.push_back(std::log(static_cast<double>(p.n)));
    ly.push_back(std::log(p.value));
  }
  const std::size_t n = lx.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lx[i] - mx, dy = ly[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx < 1e-30) throw std::invalid_argument("power-law fit: degenerate n values");
  PowerLawFit fit;
  fit.b = sxy / sxx;
  fit.a = std::exp(my - fit.b * mx);
  fit.r = syy < 1e-30 ? 0.0 : sxy / std::sqrt(sxx * syy);
  return fit;
}

std::vector<int> subset_indices(const std::vector<Demonstration>& pool, std::int64_t target_n) {
  const Distribution dist = distribution(pool);
  const auto want = plan_downsample(dist.counts, target_n);
  std::map<ScenarioType, std::int64_t> taken;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(target_n));
  for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
    const ScenarioType t = pool[static_cast<std::size_t>(i)].scene.scenario_label.value_or(
        ScenarioType::AMBIGUOUS);
    auto it = want.find(t);
    if (it == want.end()) continue;
    if (taken[t] < it->second) {
      ++taken[t];
      out.push_back(i);
    }
  }
  return out;
}

namespace {

std::string hash_demos(const std::vector<Demonstration>& demos) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Demonstration& d : demos) {
    const std::string line = serialize_demonstration(d);
    for (unsigned char c : line) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= static_cast<unsigned char>('\n');
    h *= 0x100000001b3ULL;
  }
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void check_disjoint(const std::vector<Demonstration>& train,
                    const std::vector<Demonstration>& eval_set, const char* what) {
  std::set<std::string> ids;
  for (const Demonstration& d : train) ids.insert(d.scene.scene_id);
  for (const Demonstration& d : eval_set) {
    if (ids.count(d.scene.scene_id)) {
      throw std::runtime_error(std::string("evaluation set overlaps training pool (") + what +
                               "): " + d.scene.scene_id);
    }
  }
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  write_text_file((fs::path(dir) / name).string(), content);
}

double mean_per_type_ade(const OpenLoopReport& report) {
  if (report.per_type.empty()) return report.overall_ade;
  double sum = 0.0;
  for (const auto& [_, row] : report.per_type) sum += row.mean_ade;
  return sum / static_cast<double>(report.per_type.size());
}

struct ClosedLoopMeans {
  double safety{0.0}, comfort{0.0}, rule{0.0}, efficiency{0.0}, navigation{0.0}, total{0.0};
};

ClosedLoopMeans closed_loop_eval(const ModelConfig& model, const ModelParams& params,
                                 const std::vector<Demonstration>& scenes,
                                 const std::vector<SimTrace>& expert_traces,
                                 const SimConfig& sim_cfg, std::string* per_scene_csv) {
  std::vector<MetricScores> scores(scenes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(scenes.size()); ++i) {
    const Scene& scene = scenes[static_cast<std::size_t>(i)].scene;
    const SimTrace trace = rollout(make_neural_policy(model, params, scene), scene, sim_cfg);
    scores[static_cast<std::size_t>(i)] =
        score_all(trace, scene, expert_traces[static_cast<std::size_t>(i)], sim_cfg);
  }
  ClosedLoopMeans m;
  std::string csv = "scene_id,safety,comfort,rule,efficiency,navigation,total\n";
  char buf[256];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const MetricScores& s = scores[i];
    m.safety += s.safety;
    m.comfort += s.comfort;
    m.rule += s.rule;
    m.efficiency += s.efficiency;
    m.navigation += s.navigation;
    m.total += s.total;
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  scenes[i].scene.scene_id.c_str(), s.safety, s.comfort, s.rule, s.efficiency,
                  s.navigation, s.total);
    csv += buf;
  }
  const double n = std::max<std::size_t>(1, scores.size());
  m.safety /= n;
  m.comfort /= n;
  m.rule /= n;
  m.efficiency /= n;
  m.navigation /= n;
  m.total /= n;
  if (per_scene_csv) *per_scene_csv = csv;
  return m;
}

void write_manifest_json(const std::string& run_dir, const std::string& kind,
                         const OrderedJson& config, const OrderedJson& inputs,
                         const std::vector<std::string>& outputs) {
  OrderedJson j;
  j["kind"] = kind;
  j["config"] = config;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  write_file(run_dir, "manifest.json", j.dump(2) + "\n");
}

}  // namespace

ScalingResult run_scaling_experiment(const ScalingExperimentConfig& cfg,
                                     const std::string& run_dir) {
  if (cfg.sizes.size() < 2 || !std::is_sorted(cfg.sizes.begin(), cfg.sizes.end())) {
    throw std::invalid_argument("scaling: sizes must be increasing");
  }
  fs::create_directories(run_dir);

  GenSpec pool_spec{longtail_counts(cfg.sizes.back()), seed_combine(cfg.base_seed, 1),
                    cfg.ranges};
  const std::vector<Demonstration> pool = generate_demos(pool_spec);

  GenSpec open_spec{balanced_counts(cfg.eval_open_count), seed_combine(cfg.base_seed, 2),
                    cfg.ranges};
  const std::vector<Demonstration> eval_open = generate_demos(open_spec);

  GenSpec closed_spec{balanced_counts(cfg.eval_closed_count), seed_combine(cfg.base_seed, 3),
                      cfg.ranges};
  const std::vector<Demonstration> eval_closed = generate_demos(closed_spec);

  check_disjoint(pool, eval_open, "open-loop");
  check_disjoint(pool, eval_closed, "closed-loop");

  const SimConfig sim_cfg;
  std::vector<SimTrace> expert_traces(eval_closed.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(eval_closed.size()); ++i) {
    const Scene& scene = eval_closed[static_cast<std::size_t>(i)].scene;
    expert_traces[static_cast<std::size_t>(i)] =
        rollout(make_expert_policy(scene), scene, sim_cfg);
  }

  const FeatureCache cache = FeatureCache::build(pool, cfg.train.model);

  ScalingResult result;
  std::vector<std::string> outputs = {"scaling.csv", "fit.csv", "scaling_ade.svg",
                                      "closed_scores.svg"};
  for (std::int64_t n : cfg.sizes) {
    const std::vector<int> idx = subset_indices(pool, n);
    TrainConfig tc = cfg.train;
    tc.seed = seed_combine(cfg.base_seed, 4);
    const TrainResult tr = train(cache, idx, tc);

    const std::string tag = std::to_string(n);
    save_checkpoint(tr.params, (fs::path(run_dir) / ("model_" + tag + ".ckpt")).string());
    write_file(run_dir, "train_" + tag + ".csv", curve_csv(tr.curve));
    outputs.push_back("train_" + tag + ".csv");

    const OpenLoopReport open = evaluate_open_loop(tc.model, tr.params, eval_open);
    std::string per_scene;
    const ClosedLoopMeans closed =
        closed_loop_eval(tc.model, tr.params, eval_closed, expert_traces, sim_cfg, &per_scene);
    write_file(run_dir, "closed_" + tag + ".csv", per_scene);
    outputs.push_back("closed_" + tag + ".csv");

    ScalingRow row;
    row.n = n;
    row.ade = open.overall_ade;
    row.safety = closed.safety;
    row.comfort = closed.comfort;
    row.rule = closed.rule;
    row.efficiency = closed.efficiency;
    row.navigation = closed.navigation;
    row.total = closed.total;
    result.rows.push_back(row);
  }

  std::vector<ScalingPoint> ade_points;
  for (const ScalingRow& r : result.rows) ade_points.push_back({r.n, r.ade});
  result.fit = fit_power_law(ade_points);

  std::string csv = "n,ade,safety,comfort,rule,efficiency,navigation,total\n";
  char buf[256];
  for (const ScalingRow& r : result.rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(r.n), r.ade, r.safety, r.comfort, r.rule, r.efficiency,
                  r.navigation, r.total);
    csv += buf;
  }
  write_file(run_dir, "scaling.csv", csv);
  std::snprintf(buf, sizeof(buf), "a,b,r\n%.9g,%.9g,%.9g\n", result.fit.a, result.fit.b,
                result.fit.r);
  write_file(run_dir, "fit.csv", buf);

  PlotSeries ade_series{"ade", {}, {}};
  for (const ScalingRow& r : result.rows) {
    ade_series.x.push_back(static_cast<double>(r.n));
    ade_series.y.push_back(r.ade);
  }
  write_file(run_dir, "scaling_ade.svg",
             svg_loglog_plot(ade_series, result.fit.a, result.fit.b, result.fit.r, true,
                             "Open-loop ADE vs training demonstrations", "demonstrations",
                             "ADE [m]"));
  std::vector<PlotSeries> closed_series;
  const char* names[6] = {"safety", "comfort", "rule", "efficiency", "navigation", "total"};
  for (int k = 0; k < 6; ++k) {
    PlotSeries s{names[k], {}, {}};
    for (const ScalingRow& r : result.rows) {
      s.x.push_back(static_cast<double>(r.n));
      const double vals[6] = {r.safety, r.comfort, r.rule, r.efficiency, r.navigation, r.total};
      s.y.push_back(vals[k]);
    }
    closed_series.push_back(s);
  }
  write_file(run_dir, "closed_scores.svg",
             svg_logx_plot(closed_series, "Closed-loop scores vs training demonstrations",
                           "demonstrations", "score"));

  OrderedJson inputs;
  inputs["pool_hash"] = hash_demos(pool);
  inputs["eval_open_hash"] = hash_demos(eval_open);
  inputs["eval_closed_hash"] = hash_demos(eval_closed);
  inputs["disjoint"] = true;
  write_manifest_json(run_dir, "scaling", to_json(cfg), inputs, outputs);
  return result;
}

RebalanceResult run_rebalance_experiment(const RebalanceExperimentConfig& cfg,
                                         const std::string& run_dir) {
  if (cfg.multipliers.empty() || cfg.multipliers.front() != 1.0) {
    throw std::invalid_argument("rebalance: multipliers must start at 1");
  }
  fs::create_directories(run_dir);

  const auto base_counts = longtail_counts(cfg.total);
  const double max_mult = *std::max_element(cfg.multipliers.begin(), cfg.multipliers.end());
  auto pool_counts = base_counts;
  pool_counts[cfg.target] = static_cast<std::int64_t>(
      std::llround(static_cast<double>(base_counts.at(cfg.target)) * max_mult));

  GenSpec pool_spec{pool_counts, seed_combine(cfg.base_seed, 1), cfg.ranges};
  const std::vector<Demonstration> pool = generate_demos(pool_spec);
  const std::vector<Demonstration> base = take_by_counts(pool, base_counts);

  std::map<ScenarioType, std::int64_t> target_eval_counts{{cfg.target, cfg.target_eval_count}};
  GenSpec target_eval_spec{target_eval_counts, seed_combine(cfg.base_seed, 2), cfg.ranges};
  const std::vector<Demonstration> eval_target = generate_demos(target_eval_spec);

  std::map<ScenarioType, std::int64_t> others_counts;
  for (ScenarioType t : all_scenario_types()) {
    if (t != cfg.target) others_counts[t] = cfg.others_eval_per_type;
  }
  GenSpec others_eval_spec{others_counts, seed_combine(cfg.base_seed, 3), cfg.ranges};
  const std::vector<Demonstration> eval_others = generate_demos(others_eval_spec);

  check_disjoint(pool, eval_target, "target eval");
  check_disjoint(pool, eval_others, "others eval");

  RebalanceResult result;
  std::vector<std::string> outputs = {"rebalance.csv"};
  for (double mult : cfg.multipliers) {
    const std::vector<Demonstration> ds = rebalance(base, pool, cfg.target, mult, true, 0);
    const FeatureCache cache = FeatureCache::build(ds, cfg.train.model);
    std::vector<int> idx(cache.size());
    for (int i = 0; i < cache.size(); ++i) idx[i] = i;
    TrainConfig tc = cfg.train;
    tc.seed = seed_combine(cfg.base_seed, 4);
    const TrainResult tr = train(cache, idx, tc);

    char tag[32];
    std::snprintf(tag, sizeof(tag), "x%g", mult);
    save_checkpoint(tr.params, (fs::path(run_dir) / ("model_" + std::string(tag) + ".ckpt")).string());

    const OpenLoopReport target_rep = evaluate_open_loop(tc.model, tr.params, eval_target);
    const OpenLoopReport others_rep = evaluate_open_loop(tc.model, tr.params, eval_others);

    RebalanceRow row;
    row.multiplier = mult;
    row.target_count = distribution(ds).counts.at(cfg.target);
    row.target_ade = target_rep.overall_ade;
    row.others_ade = mean_per_type_ade(others_rep);
    result.rows.push_back(row);
  }
  const RebalanceRow& base_row = result.rows.front();
  for (RebalanceRow& row : result.rows) {
    row.target_count_delta_pct =
        100.0 * (static_cast<double>(row.target_count) / base_row.target_count - 1.0);
    row.target_ade_delta_pct = 100.0 * (row.target_ade / base_row.target_ade - 1.0);
    row.others_ade_delta_pct = 100.0 * (row.others_ade / base_row.others_ade - 1.0);
  }

  std::string csv =
      "multiplier,target_count,target_count_delta_pct,target_ade,target_ade_delta_pct,"
      "others_ade,others_ade_delta_pct\n";
  char buf[256];
  for (const RebalanceRow& r : result.rows) {
    std::snprintf(buf, sizeof(buf), "%.6g,%lld,%.6g,%.9g,%.6g,%.9g,%.6g\n", r.multiplier,
                  static_cast<long long>(r.target_count), r.target_count_delta_pct, r.target_ade,
                  r.target_ade_delta_pct, r.others_ade, r.others_ade_delta_pct);
    csv += buf;
  }
  write_file(run_dir, "rebalance.csv", csv);

  OrderedJson inputs;
  inputs["pool_hash"] = hash_demos(pool);
  inputs["eval_target_hash"] = hash_demos(eval_target);
  inputs["eval_others_hash"] = hash_demos(eval_others);
  inputs["disjoint"] = true;
  write_manifest_json(run_dir, "rebalance", to_json(cfg), inputs, outputs);
  return result;
}

GeneralizationResult run_generalization_experiment(const GeneralizationExperimentConfig& cfg,
                                                   const std::string& run_dir) {
  if (cfg.sizes.empty() || !std::is_sorted(cfg.sizes.begin(), cfg.sizes.end())) {
    throw std::invalid_argument("generalization: sizes must be increasing");
  }
  fs::create_directories(run_dir);

  auto weights = longtail_weights();
  for (ScenarioType t : cfg.heldout) weights.erase(t);
  const auto counts21 = apportion_counts(weights, cfg.sizes.back());
  GenSpec pool_spec{counts21, seed_combine(cfg.base_seed, 1), cfg.ranges};
  const std::vector<Demonstration> pool = generate_demos(pool_spec);

  std::map<ScenarioType, std::int64_t> heldout_counts;
  for (ScenarioType t : cfg.heldout) heldout_counts[t] = cfg.heldout_eval_per_type;
  GenSpec heldout_spec{heldout_counts, seed_combine(cfg.base_seed, 2), cfg.ranges};
  std::vector<Demonstration> eval_heldout = generate_demos(heldout_spec);
  // Strict filtering: only unambiguous records qualify as held-out tests.
  std::erase_if(eval_heldout, [](const Demonstration& d) {
    return classify(d.scene, d.expert_future, true) == ScenarioType::AMBIGUOUS;
  });
  if (eval_heldout.empty()) {
    throw std::runtime_error("generalization: strict held-out evaluation set is empty");
  }

  std::map<ScenarioType, std::int64_t> similar_counts;
  for (ScenarioType t : cfg.similar) similar_counts[t] = cfg.similar_eval_per_type;
  GenSpec similar_spec{similar_counts, seed_combine(cfg.base_seed, 3), cfg.ranges};
  const std::vector<Demonstration> eval_similar = generate_demos(similar_spec);

  check_disjoint(pool, eval_heldout, "held-out eval");
  check_disjoint(pool, eval_similar, "similar eval");

  GeneralizationResult result;
  std::vector<std::string> outputs = {"generalization.csv"};
  {
    const FeatureCache cache = FeatureCache::build(pool, cfg.train.model);
    for (std::int64_t n : cfg.sizes) {
      const std::vector<int> idx = subset_indices(pool, n);
      TrainConfig tc = cfg.train;
      tc.seed = seed_combine(cfg.base_seed, 4);
      const TrainResult tr = train(cache, idx, tc);
      save_checkpoint(tr.params,
                      (fs::path(run_dir) / ("model_excl_" + std::to_string(n) + ".ckpt")).string());

      GeneralizationRow row;
      row.n = n;
      row.heldout_ade = evaluate_open_loop(tc.model, tr.params, eval_heldout).overall_ade;
      row.similar_ade = evaluate_open_loop(tc.model, tr.params, eval_similar).overall_ade;
      row.gap = row.heldout_ade - row.similar_ade;
      result.rows.push_back(row);
    }
  }

  if (cfg.run_control) {
    GenSpec control_spec{longtail_counts(cfg.sizes.back()), seed_combine(cfg.base_seed, 1),
                         cfg.ranges};
    const std::vector<Demonstration> control_pool = generate_demos(control_spec);
    check_disjoint(control_pool, eval_heldout, "held-out eval (control)");
    const FeatureCache cache = FeatureCache::build(control_pool, cfg.train.model);
    std::vector<int> idx(cache.size());
    for (int i = 0; i < cache.size(); ++i) idx[i] = i;
    TrainConfig tc = cfg.train;
    tc.seed = seed_combine(cfg.base_seed, 4);
    const TrainResult tr = train(cache, idx, tc);
    save_checkpoint(tr.params, (fs::path(run_dir) / "model_control.ckpt").string());
    result.control_heldout_ade =
        evaluate_open_loop(tc.model, tr.params, eval_heldout).overall_ade;
  }

  std::string csv = "kind,n,heldout_ade,similar_ade,gap\n";
  char buf[256];
  for (const GeneralizationRow& r : result.rows) {
    std::snprintf(buf, sizeof(buf), "excluded,%lld,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(r.n), r.heldout_ade, r.similar_ade, r.gap);
    csv += buf;
  }
  if (result.control_heldout_ade >= 0.0) {
    std::snprintf(buf, sizeof(buf), "control,%lld,%.9g,,\n",
                  static_cast<long long>(cfg.sizes.back()), result.control_heldout_ade);
    csv += buf;
  }
  write_file(run_dir, "generalization.csv", csv);

  OrderedJson inputs;
  inputs["pool_hash"] = hash_demos(pool);
  inputs["eval_heldout_hash"] = hash_demos(eval_heldout);
  inputs["eval_similar_hash"] = hash_demos(eval_similar);
  inputs["disjoint"] = true;
  write_manifest_json(run_dir, "generalization", to_json(cfg), inputs, outputs);
  return result;
}

void run_from_manifest(const std::string& manifest_path, const std::string& out_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("manifest: invalid JSON: ") + e.what());
  }
  const std::string kind = j.at("kind").get<std::string>();
  const nlohmann::json& config = j.at("config");
  if (kind == "scaling") {
    ScalingExperimentConfig cfg;
    from_json(config, "config", &cfg);
    run_scaling_experiment(cfg, out_dir);
  } else if (kind == "rebalance") {
    RebalanceExperimentConfig cfg;
    from_json(config, "config", &cfg);
    run_rebalance_experiment(cfg, out_dir);
  } else if (kind == "generalization") {
    GeneralizationExperimentConfig cfg;
    from_json(config, "config", &cfg);
    run_generalization_experiment(cfg, out_dir);
  } else {
    throw std::runtime_error("manifest: unknown experiment kind: " + kind);
  }
}

}  // namespace drivelab
