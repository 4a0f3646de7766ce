#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "drivelab/config.hpp"
#include "drivelab/lab.hpp"
#include "drivelab/mining.hpp"
#include "drivelab/openloop.hpp"
#include "drivelab/policy.hpp"
#include "drivelab/report.hpp"
#include "drivelab/rng.hpp"
#include "drivelab/scene_io.hpp"
#include "drivelab/worldgen.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace drivelab;

namespace {

/// DRIVELAB_DATA_DIR prefixes relative data paths; all numeric parameters
/// must come from config or flags.
std::string resolve_path(const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  const char* base = std::getenv("DRIVELAB_DATA_DIR");
  if (!base || !*base) return p;
  return (fs::path(base) / p).string();
}

std::map<ScenarioType, std::int64_t> counts_for(const RunConfig& cfg) {
  if (cfg.gen.profile == "balanced") return balanced_counts(cfg.gen.total);
  if (cfg.gen.profile == "explicit") {
    if (cfg.gen.counts.empty()) {
      throw std::invalid_argument("gen.counts: explicit profile needs per-type counts");
    }
    return cfg.gen.counts;
  }
  return longtail_counts(cfg.gen.total);
}

void echo_config(const RunConfig& cfg, const std::string& dir) {
  fs::create_directories(dir);
  write_text_file((fs::path(dir) / "config.json").string(), dump_run_config(cfg));
}

int run(int argc, char** argv) {
  CLI::App app{"drivelab: synthetic driving-world imitation-learning lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  int jobs = 0;
  bool dump_config = false;
  app.add_option("--config", config_path, "JSON config file (defaults when omitted)");
  app.add_option("--seed", seed_override, "override the global seed");
  app.add_option("--jobs", jobs, "worker threads (default: logical cores)");
  app.add_flag("--dump-config", dump_config, "print the effective config and exit");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a demonstration dataset + manifest");
  std::string gen_out = "dataset.jsonl";
  std::optional<std::int64_t> gen_total;
  std::string gen_profile;
  gen->add_option("--out", gen_out, "output dataset path");
  gen->add_option("--total", gen_total, "demonstration count override");
  gen->add_option("--profile", gen_profile, "longtail | balanced | explicit");

  // mine
  auto* mine = app.add_subcommand("mine", "distribution reports, downsampling, rebalancing");
  std::string mine_data, mine_out_dir = "mine_out", mine_pool, mine_out;
  std::optional<std::int64_t> mine_downsample;
  std::string mine_rebalance_type;
  double mine_mult = 2.0;
  bool mine_keep_total = true;
  bool mine_classify = false;
  mine->add_option("--data", mine_data, "input dataset")->required();
  mine->add_option("--out-dir", mine_out_dir, "report directory");
  mine->add_option("--downsample", mine_downsample, "uniform downsample to N records");
  mine->add_option("--rebalance", mine_rebalance_type, "scenario type to boost");
  mine->add_option("--mult", mine_mult, "rebalance multiplier");
  mine->add_flag("--keep-total,!--no-keep-total", mine_keep_total,
                 "hold the total record count constant");
  mine->add_option("--pool", mine_pool, "reserve pool dataset for rebalancing");
  mine->add_option("--out", mine_out, "output dataset for downsample/rebalance");
  mine->add_flag("--classify", mine_classify, "print strict per-record labels");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a policy on a dataset");
  std::string train_data, train_out = "model.ckpt", train_curve, train_eval;
  train_cmd->add_option("--data", train_data, "training dataset")->required();
  train_cmd->add_option("--out", train_out, "checkpoint path");
  train_cmd->add_option("--curve", train_curve, "loss curve CSV path");
  train_cmd->add_option("--eval", train_eval, "held-out dataset for per-epoch ADE");

  // eval-open
  auto* eo = app.add_subcommand("eval-open", "open-loop ADE report");
  std::string eo_model, eo_data, eo_out;
  std::optional<double> eo_norm;
  eo->add_option("--model", eo_model, "checkpoint")->required();
  eo->add_option("--data", eo_data, "evaluation dataset")->required();
  eo->add_option("--out", eo_out, "report CSV path");
  eo->add_option("--normalize", eo_norm, "optional ADE normalization constant");

  // eval-closed
  auto* ec = app.add_subcommand("eval-closed", "closed-loop rollout + scores");
  std::string ec_model, ec_data, ec_out, ec_traces;
  ec->add_option("--model", ec_model, "checkpoint")->required();
  ec->add_option("--data", ec_data, "evaluation dataset")->required();
  ec->add_option("--out", ec_out, "report CSV path");
  ec->add_option("--traces", ec_traces, "directory for per-scene trace files");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a full experiment");
  std::string exp_kind, exp_out_dir = "run", exp_manifest;
  exp->add_option("--kind", exp_kind, "scaling | rebalance | generalization");
  exp->add_option("--out-dir", exp_out_dir, "run directory");
  exp->add_option("--from-manifest", exp_manifest, "re-run from a manifest file");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "power-law fit of a curve CSV");
  std::string fit_curve, fit_x = "n", fit_y = "ade";
  fit_cmd->add_option("--curve", fit_curve, "CSV with header")->required();
  fit_cmd->add_option("--x-col", fit_x, "x column name");
  fit_cmd->add_option("--y-col", fit_y, "y column name");

  // report
  auto* rep = app.add_subcommand("report", "render plots from experiment CSV outputs");
  std::string rep_scaling_csv, rep_out_dir = "report_out";
  rep->add_option("--scaling-csv", rep_scaling_csv, "scaling.csv from a scaling run")->required();
  rep->add_option("--out-dir", rep_out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#endif

  RunConfig cfg;
  if (!config_path.empty()) {
    cfg = parse_run_config(read_text_file(resolve_path(config_path)));
  }
  if (seed_override) cfg.seed = *seed_override;
  if (dump_config) {
    std::cout << dump_run_config(cfg);
    return 0;
  }

  if (gen->parsed()) {
    if (gen_total) cfg.gen.total = *gen_total;
    if (!gen_profile.empty()) cfg.gen.profile = gen_profile;
    GenSpec spec{counts_for(cfg), cfg.seed, cfg.ranges};
    const std::string out = resolve_path(gen_out);
    const GenReport report = generate_dataset(spec, out);
    std::int64_t total = 0, rejected = 0;
    for (const auto& [_, c] : report.counts) total += c;
    for (const auto& [_, c] : report.rejected) rejected += c;
    std::printf("wrote %lld demonstrations to %s (%lld gate rejections)\n",
                static_cast<long long>(total), out.c_str(), static_cast<long long>(rejected));
    return 0;
  }

  if (mine->parsed()) {
    const auto demos = read_dataset(resolve_path(mine_data));
    if (mine_classify) {
      for (const Demonstration& d : demos) {
        std::printf("%s,%s\n", d.scene.scene_id.c_str(),
                    to_string(classify(d.scene, d.expert_future, true)).c_str());
      }
      return 0;
    }
    if (mine_downsample) {
      if (mine_out.empty()) throw std::invalid_argument("--out: required for --downsample");
      const auto sampled = downsample_uniform(demos, *mine_downsample, cfg.seed);
      write_dataset(sampled, resolve_path(mine_out));
      std::printf("wrote %zu records to %s\n", sampled.size(), mine_out.c_str());
      return 0;
    }
    if (!mine_rebalance_type.empty()) {
      if (mine_pool.empty() || mine_out.empty()) {
        throw std::invalid_argument("--pool and --out: required for --rebalance");
      }
      const auto pool = read_dataset(resolve_path(mine_pool));
      const auto rebalanced =
          rebalance(demos, pool, scenario_type_from_string(mine_rebalance_type), mine_mult,
                    mine_keep_total, cfg.seed);
      write_dataset(rebalanced, resolve_path(mine_out));
      std::printf("wrote %zu records to %s\n", rebalanced.size(), mine_out.c_str());
      return 0;
    }
    const Distribution dist = distribution(demos);
    fs::create_directories(mine_out_dir);
    write_text_file((fs::path(mine_out_dir) / "distribution.csv").string(),
                    distribution_csv(dist));
    write_text_file((fs::path(mine_out_dir) / "distribution.svg").string(),
                    distribution_svg(dist));
    std::printf("distribution report for %lld records in %s\n",
                static_cast<long long>(dist.total), mine_out_dir.c_str());
    return 0;
  }

  if (train_cmd->parsed()) {
    const auto demos = read_dataset(resolve_path(train_data));
    const FeatureCache cache = FeatureCache::build(demos, cfg.train.model);
    std::vector<int> idx(cache.size());
    for (int i = 0; i < cache.size(); ++i) idx[i] = i;
    TrainConfig tc = cfg.train;
    std::function<double(const ModelParams&)> eval_fn;
    std::vector<Demonstration> eval_demos;
    if (!train_eval.empty()) {
      eval_demos = read_dataset(resolve_path(train_eval));
      eval_fn = [&](const ModelParams& p) {
        return evaluate_open_loop(tc.model, p, eval_demos).overall_ade;
      };
    }
    const TrainResult result = train(cache, idx, tc, eval_fn);
    save_checkpoint(result.params, resolve_path(train_out));
    if (!train_curve.empty()) write_text_file(resolve_path(train_curve), curve_csv(result.curve));
    std::printf("trained %lld steps on %d records -> %s (%zu parameters)\n",
                static_cast<long long>(result.params.step), cache.size(), train_out.c_str(),
                result.params.total());
    return 0;
  }

  if (eo->parsed()) {
    const auto demos = read_dataset(resolve_path(eo_data));
    const ModelParams params = load_checkpoint(resolve_path(eo_model), cfg.train.model);
    const OpenLoopReport report =
        evaluate_open_loop(cfg.train.model, params, demos,
                           eo_norm ? std::optional<double>(*eo_norm) : std::nullopt);
    if (!eo_out.empty()) write_text_file(resolve_path(eo_out), open_loop_csv(report));
    std::printf("open-loop ADE %.4f m over %lld records\n", report.overall_ade,
                static_cast<long long>(report.count));
    return 0;
  }

  if (ec->parsed()) {
    const auto demos = read_dataset(resolve_path(ec_data));
    const ModelParams params = load_checkpoint(resolve_path(ec_model), cfg.train.model);
    if (!ec_traces.empty()) fs::create_directories(ec_traces);
    std::string csv = "scene_id,safety,comfort,rule,efficiency,navigation,total\n";
    double mean_total = 0.0;
    for (const Demonstration& demo : demos) {
      const SimTrace expert_trace = rollout(make_expert_policy(demo.scene), demo.scene, cfg.sim);
      const SimTrace trace =
          rollout(make_neural_policy(cfg.train.model, params, demo.scene), demo.scene, cfg.sim);
      const MetricScores s = score_all(trace, demo.scene, expert_trace, cfg.sim);
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                    demo.scene.scene_id.c_str(), s.safety, s.comfort, s.rule, s.efficiency,
                    s.navigation, s.total);
      csv += buf;
      mean_total += s.total;
      if (!ec_traces.empty()) {
        write_trace(trace, (fs::path(ec_traces) / (demo.scene.scene_id + ".trace")).string());
      }
    }
    if (!ec_out.empty()) write_text_file(resolve_path(ec_out), csv);
    std::printf("closed-loop mean total score %.4f over %zu scenes\n",
                demos.empty() ? 0.0 : mean_total / static_cast<double>(demos.size()),
                demos.size());
    return 0;
  }

  if (exp->parsed()) {
    const std::string out_dir = resolve_path(exp_out_dir);
    if (!exp_manifest.empty()) {
      run_from_manifest(resolve_path(exp_manifest), out_dir);
      std::printf("re-ran experiment from %s into %s\n", exp_manifest.c_str(), out_dir.c_str());
      return 0;
    }
    echo_config(cfg, out_dir);
    if (exp_kind == "scaling") {
      const ScalingResult r = run_scaling_experiment(cfg.scaling, out_dir);
      std::printf("scaling: fit a=%.4g b=%.4g r=%.4g\n", r.fit.a, r.fit.b, r.fit.r);
    } else if (exp_kind == "rebalance") {
      const RebalanceResult r = run_rebalance_experiment(cfg.rebalance, out_dir);
      for (const RebalanceRow& row : r.rows) {
        std::printf("rebalance x%g: target ADE %.4f (%+.1f%%), others %.4f (%+.1f%%)\n",
                    row.multiplier, row.target_ade, row.target_ade_delta_pct, row.others_ade,
                    row.others_ade_delta_pct);
      }
    } else if (exp_kind == "generalization") {
      const GeneralizationResult r = run_generalization_experiment(cfg.generalization, out_dir);
      for (const GeneralizationRow& row : r.rows) {
        std::printf("generalization n=%lld: heldout %.4f similar %.4f gap %.4f\n",
                    static_cast<long long>(row.n), row.heldout_ade, row.similar_ade, row.gap);
      }
      if (r.control_heldout_ade >= 0.0) {
        std::printf("control heldout ADE %.4f\n", r.control_heldout_ade);
      }
    } else {
      throw std::invalid_argument("--kind: expected scaling, rebalance, or generalization");
    }
    return 0;
  }

  if (fit_cmd->parsed()) {
    std::istringstream in(read_text_file(resolve_path(fit_curve)));
    std::string header;
    std::getline(in, header);
    std::vector<std::string> cols;
    std::stringstream hs(header);
    std::string col;
    while (std::getline(hs, col, ',')) cols.push_back(col);
    int xi = -1, yi = -1;
    for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
      if (cols[i] == fit_x) xi = i;
      if (cols[i] == fit_y) yi = i;
    }
    if (xi < 0 || yi < 0) {
      throw std::invalid_argument("fit: columns '" + fit_x + "'/'" + fit_y + "' not in header");
    }
    std::vector<ScalingPoint> points;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ls(line);
      std::vector<std::string> fields;
      while (std::getline(ls, col, ',')) fields.push_back(col);
      if (static_cast<int>(fields.size()) <= std::max(xi, yi)) continue;
      points.push_back({static_cast<std::int64_t>(std::stod(fields[xi])), std::stod(fields[yi])});
    }
    const PowerLawFit f = fit_power_law(points);
    std::printf("a=%.9g b=%.9g r=%.9g\n", f.a, f.b, f.r);
    return 0;
  }

  if (rep->parsed()) {
    std::istringstream in(read_text_file(resolve_path(rep_scaling_csv)));
    std::string line;
    std::getline(in, line);  // header: n,ade,...
    PlotSeries series{"ade", {}, {}};
    std::vector<ScalingPoint> points;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ls(line);
      std::string f1, f2;
      std::getline(ls, f1, ',');
      std::getline(ls, f2, ',');
      series.x.push_back(std::stod(f1));
      series.y.push_back(std::stod(f2));
      points.push_back({static_cast<std::int64_t>(std::stod(f1)), std::stod(f2)});
    }
    const PowerLawFit f = fit_power_law(points);
    fs::create_directories(rep_out_dir);
    write_text_file((fs::path(rep_out_dir) / "scaling_ade.svg").string(),
                    svg_loglog_plot(series, f.a, f.b, f.r, true,
                                    "Open-loop ADE vs training demonstrations", "demonstrations",
                                    "ADE [m]"));
    std::printf("wrote %s/scaling_ade.svg (a=%.4g b=%.4g r=%.4g)\n", rep_out_dir.c_str(), f.a,
                f.b, f.r);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const DatasetError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
}
