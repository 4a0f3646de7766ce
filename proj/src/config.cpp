#include "drivelab/config.hpp"

#include <set>
#include <stdexcept>

namespace drivelab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + (path.empty() ? "<root>" : path) + ": " + what);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(),
                                       "unknown key");
  }
}

template <typename T>
void read(const json& j, const std::string& path, const char* key, T* out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    *out = it->get<T>();
  } catch (const json::exception& e) {
    fail(path + "." + key, e.what());
  }
}

}  // namespace

OrderedJson to_json(const GenRanges& v) {
  OrderedJson j;
  j["width_jitter_lo"] = v.width_jitter_lo;
  j["width_jitter_hi"] = v.width_jitter_hi;
  j["speed_frac_lo"] = v.speed_frac_lo;
  j["speed_frac_hi"] = v.speed_frac_hi;
  j["highway_limit_lo"] = v.highway_limit_lo;
  j["highway_limit_hi"] = v.highway_limit_hi;
  j["mainroad_limit_lo"] = v.mainroad_limit_lo;
  j["mainroad_limit_hi"] = v.mainroad_limit_hi;
  j["subroad_limit_lo"] = v.subroad_limit_lo;
  j["subroad_limit_hi"] = v.subroad_limit_hi;
  j["ambient_density"] = v.ambient_density;
  return j;
}

void from_json(const json& j, const std::string& path, GenRanges* v) {
  check_keys(j, path,
             {"width_jitter_lo", "width_jitter_hi", "speed_frac_lo", "speed_frac_hi",
              "highway_limit_lo", "highway_limit_hi", "mainroad_limit_lo", "mainroad_limit_hi",
              "subroad_limit_lo", "subroad_limit_hi", "ambient_density"});
  read(j, path, "width_jitter_lo", &v->width_jitter_lo);
  read(j, path, "width_jitter_hi", &v->width_jitter_hi);
  read(j, path, "speed_frac_lo", &v->speed_frac_lo);
  read(j, path, "speed_frac_hi", &v->speed_frac_hi);
  read(j, path, "highway_limit_lo", &v->highway_limit_lo);
  read(j, path, "highway_limit_hi", &v->highway_limit_hi);
  read(j, path, "mainroad_limit_lo", &v->mainroad_limit_lo);
  read(j, path, "mainroad_limit_hi", &v->mainroad_limit_hi);
  read(j, path, "subroad_limit_lo", &v->subroad_limit_lo);
  read(j, path, "subroad_limit_hi", &v->subroad_limit_hi);
  read(j, path, "ambient_density", &v->ambient_density);
}

OrderedJson to_json(const ModelConfig& v) {
  OrderedJson j;
  j["height"] = v.raster.height;
  j["width"] = v.raster.width;
  j["resolution"] = v.raster.resolution;
  j["anchor_x"] = v.raster.anchor_x;
  j["anchor_y"] = v.raster.anchor_y;
  j["queue_len"] = v.raster.queue_len;
  j["max_speed"] = v.raster.max_speed;
  j["pool"] = v.pool;
  j["hidden"] = v.hidden;
  j["gating_hidden"] = v.gating_hidden;
  j["modes"] = v.modes;
  j["plan_len"] = v.plan_len;
  j["agent_slots"] = v.agent_slots;
  return j;
}

void from_json(const json& j, const std::string& path, ModelConfig* v) {
  check_keys(j, path,
             {"height", "width", "resolution", "anchor_x", "anchor_y", "queue_len", "max_speed",
              "pool", "hidden", "gating_hidden", "modes", "plan_len", "agent_slots"});
  read(j, path, "height", &v->raster.height);
  read(j, path, "width", &v->raster.width);
  read(j, path, "resolution", &v->raster.resolution);
  read(j, path, "anchor_x", &v->raster.anchor_x);
  read(j, path, "anchor_y", &v->raster.anchor_y);
  read(j, path, "queue_len", &v->raster.queue_len);
  read(j, path, "max_speed", &v->raster.max_speed);
  read(j, path, "pool", &v->pool);
  read(j, path, "hidden", &v->hidden);
  read(j, path, "gating_hidden", &v->gating_hidden);
  read(j, path, "modes", &v->modes);
  read(j, path, "plan_len", &v->plan_len);
  read(j, path, "agent_slots", &v->agent_slots);
}

OrderedJson to_json(const TrainConfig& v) {
  OrderedJson j;
  j["lr"] = v.lr;
  j["weight_decay"] = v.weight_decay;
  j["beta1"] = v.beta1;
  j["beta2"] = v.beta2;
  j["eps"] = v.eps;
  j["batch_size"] = v.batch_size;
  j["steps"] = v.steps;
  j["seed"] = v.seed;
  j["w_plan"] = v.loss_weights.plan;
  j["w_mot"] = v.loss_weights.mot;
  j["w_occ"] = v.loss_weights.occ;
  j["w_map"] = v.loss_weights.map;
  j["log_every"] = v.log_every;
  j["model"] = to_json(v.model);
  return j;
}

void from_json(const json& j, const std::string& path, TrainConfig* v) {
  check_keys(j, path,
             {"lr", "weight_decay", "beta1", "beta2", "eps", "batch_size", "steps", "seed",
              "w_plan", "w_mot", "w_occ", "w_map", "log_every", "model"});
  read(j, path, "lr", &v->lr);
  read(j, path, "weight_decay", &v->weight_decay);
  read(j, path, "beta1", &v->beta1);
  read(j, path, "beta2", &v->beta2);
  read(j, path, "eps", &v->eps);
  read(j, path, "batch_size", &v->batch_size);
  read(j, path, "steps", &v->steps);
  read(j, path, "seed", &v->seed);
  read(j, path, "w_plan", &v->loss_weights.plan);
  read(j, path, "w_mot", &v->loss_weights.mot);
  read(j, path, "w_occ", &v->loss_weights.occ);
  read(j, path, "w_map", &v->loss_weights.map);
  read(j, path, "log_every", &v->log_every);
  if (j.contains("model")) from_json(j.at("model"), path + ".model", &v->model);
}

OrderedJson to_json(const SimConfig& v) {
  OrderedJson j;
  j["dt"] = v.dt;
  j["replan_interval"] = v.replan_interval;
  j["horizon"] = v.horizon;
  j["max_accel"] = v.max_accel;
  j["max_yaw_rate"] = v.max_yaw_rate;
  j["comfort"]["max_abs_lat_accel"] = v.comfort.max_abs_lat_accel;
  j["comfort"]["min_lon_accel"] = v.comfort.min_lon_accel;
  j["comfort"]["max_lon_accel"] = v.comfort.max_lon_accel;
  j["comfort"]["max_abs_yaw_rate"] = v.comfort.max_abs_yaw_rate;
  j["comfort"]["max_abs_jerk"] = v.comfort.max_abs_jerk;
  j["comfort"]["min_turn_radius"] = v.comfort.min_turn_radius;
  j["comfort"]["radius_speed"] = v.comfort.radius_speed;
  j["penalties"]["rule_deduction"] = v.penalties.rule_deduction;
  j["penalties"]["efficiency_factor"] = v.penalties.efficiency_factor;
  j["penalties"]["navigation_partial"] = v.penalties.navigation_partial;
  j["penalties"]["off_drivable_cap"] = v.penalties.off_drivable_cap;
  return j;
}

void from_json(const json& j, const std::string& path, SimConfig* v) {
  check_keys(j, path, {"dt", "replan_interval", "horizon", "max_accel", "max_yaw_rate", "comfort",
                       "penalties"});
  read(j, path, "dt", &v->dt);
  read(j, path, "replan_interval", &v->replan_interval);
  read(j, path, "horizon", &v->horizon);
  read(j, path, "max_accel", &v->max_accel);
  read(j, path, "max_yaw_rate", &v->max_yaw_rate);
  if (j.contains("comfort")) {
    const json& c = j.at("comfort");
    const std::string p = path + ".comfort";
    check_keys(c, p,
               {"max_abs_lat_accel", "min_lon_accel", "max_lon_accel", "max_abs_yaw_rate",
                "max_abs_jerk", "min_turn_radius", "radius_speed"});
    read(c, p, "max_abs_lat_accel", &v->comfort.max_abs_lat_accel);
    read(c, p, "min_lon_accel", &v->comfort.min_lon_accel);
    read(c, p, "max_lon_accel", &v->comfort.max_lon_accel);
    read(c, p, "max_abs_yaw_rate", &v->comfort.max_abs_yaw_rate);
    read(c, p, "max_abs_jerk", &v->comfort.max_abs_jerk);
    read(c, p, "min_turn_radius", &v->comfort.min_turn_radius);
    read(c, p, "radius_speed", &v->comfort.radius_speed);
  }
  if (j.contains("penalties")) {
    const json& c = j.at("penalties");
    const std::string p = path + ".penalties";
    check_keys(c, p,
               {"rule_deduction", "efficiency_factor", "navigation_partial", "off_drivable_cap"});
    read(c, p, "rule_deduction", &v->penalties.rule_deduction);
    read(c, p, "efficiency_factor", &v->penalties.efficiency_factor);
    read(c, p, "navigation_partial", &v->penalties.navigation_partial);
    read(c, p, "off_drivable_cap", &v->penalties.off_drivable_cap);
  }
}

OrderedJson to_json(const ScalingExperimentConfig& v) {
  OrderedJson j;
  j["sizes"] = v.sizes;
  j["base_seed"] = v.base_seed;
  j["eval_open_count"] = v.eval_open_count;
  j["eval_closed_count"] = v.eval_closed_count;
  j["train"] = to_json(v.train);
  j["ranges"] = to_json(v.ranges);
  return j;
}

void from_json(const json& j, const std::string& path, ScalingExperimentConfig* v) {
  check_keys(j, path,
             {"sizes", "base_seed", "eval_open_count", "eval_closed_count", "train", "ranges"});
  read(j, path, "sizes", &v->sizes);
  read(j, path, "base_seed", &v->base_seed);
  read(j, path, "eval_open_count", &v->eval_open_count);
  read(j, path, "eval_closed_count", &v->eval_closed_count);
  if (j.contains("train")) from_json(j.at("train"), path + ".train", &v->train);
  if (j.contains("ranges")) from_json(j.at("ranges"), path + ".ranges", &v->ranges);
}

OrderedJson to_json(const RebalanceExperimentConfig& v) {
  OrderedJson j;
  j["total"] = v.total;
  j["target"] = to_string(v.target);
  j["multipliers"] = v.multipliers;
  j["base_seed"] = v.base_seed;
  j["target_eval_count"] = v.target_eval_count;
  j["others_eval_per_type"] = v.others_eval_per_type;
  j["train"] = to_json(v.train);
  j["ranges"] = to_json(v.ranges);
  return j;
}

void from_json(const json& j, const std::string& path, RebalanceExperimentConfig* v) {
  check_keys(j, path,
             {"total", "target", "multipliers", "base_seed", "target_eval_count",
              "others_eval_per_type", "train", "ranges"});
  read(j, path, "total", &v->total);
  if (j.contains("target")) {
    try {
      v->target = scenario_type_from_string(j.at("target").get<std::string>());
    } catch (const std::exception& e) {
      fail(path + ".target", e.what());
    }
  }
  read(j, path, "multipliers", &v->multipliers);
  read(j, path, "base_seed", &v->base_seed);
  read(j, path, "target_eval_count", &v->target_eval_count);
  read(j, path, "others_eval_per_type", &v->others_eval_per_type);
  if (j.contains("train")) from_json(j.at("train"), path + ".train", &v->train);
  if (j.contains("ranges")) from_json(j.at("ranges"), path + ".ranges", &v->ranges);
}

OrderedJson to_json(const GeneralizationExperimentConfig& v) {
  OrderedJson j;
  j["sizes"] = v.sizes;
  j["base_seed"] = v.base_seed;
  OrderedJson held = OrderedJson::array();
  for (ScenarioType t : v.heldout) held.push_back(to_string(t));
  j["heldout"] = held;
  OrderedJson sim = OrderedJson::array();
  for (ScenarioType t : v.similar) sim.push_back(to_string(t));
  j["similar"] = sim;
  j["heldout_eval_per_type"] = v.heldout_eval_per_type;
  j["similar_eval_per_type"] = v.similar_eval_per_type;
  j["run_control"] = v.run_control;
  j["train"] = to_json(v.train);
  j["ranges"] = to_json(v.ranges);
  return j;
}

void from_json(const json& j, const std::string& path, GeneralizationExperimentConfig* v) {
  check_keys(j, path,
             {"sizes", "base_seed", "heldout", "similar", "heldout_eval_per_type",
              "similar_eval_per_type", "run_control", "train", "ranges"});
  read(j, path, "sizes", &v->sizes);
  read(j, path, "base_seed", &v->base_seed);
  auto read_types = [&](const char* key, std::vector<ScenarioType>* out) {
    if (!j.contains(key)) return;
    out->clear();
    for (const auto& item : j.at(key)) {
      try {
        out->push_back(scenario_type_from_string(item.get<std::string>()));
      } catch (const std::exception& e) {
        fail(path + "." + key, e.what());
      }
    }
  };
  read_types("heldout", &v->heldout);
  read_types("similar", &v->similar);
  read(j, path, "heldout_eval_per_type", &v->heldout_eval_per_type);
  read(j, path, "similar_eval_per_type", &v->similar_eval_per_type);
  read(j, path, "run_control", &v->run_control);
  if (j.contains("train")) from_json(j.at("train"), path + ".train", &v->train);
  if (j.contains("ranges")) from_json(j.at("ranges"), path + ".ranges", &v->ranges);
}

OrderedJson to_json(const RunConfig& v) {
  OrderedJson j;
  j["seed"] = v.seed;
  j["ranges"] = to_json(v.ranges);
  j["gen"]["profile"] = v.gen.profile;
  j["gen"]["total"] = v.gen.total;
  OrderedJson counts = OrderedJson::object();
  for (const auto& [t, c] : v.gen.counts) counts[to_string(t)] = c;
  j["gen"]["counts"] = counts;
  j["train"] = to_json(v.train);
  j["sim"] = to_json(v.sim);
  j["scaling"] = to_json(v.scaling);
  j["rebalance"] = to_json(v.rebalance);
  j["generalization"] = to_json(v.generalization);
  return j;
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig v;
  check_keys(j, "",
             {"seed", "ranges", "gen", "train", "sim", "scaling", "rebalance", "generalization"});
  read(j, "", "seed", &v.seed);
  if (j.contains("ranges")) from_json(j.at("ranges"), "ranges", &v.ranges);
  if (j.contains("gen")) {
    const json& g = j.at("gen");
    check_keys(g, "gen", {"profile", "total", "counts"});
    read(g, "gen", "profile", &v.gen.profile);
    read(g, "gen", "total", &v.gen.total);
    if (g.contains("counts")) {
      if (!g.at("counts").is_object()) fail("gen.counts", "expected object");
      for (auto it = g.at("counts").begin(); it != g.at("counts").end(); ++it) {
        try {
          v.gen.counts[scenario_type_from_string(it.key())] = it.value().get<std::int64_t>();
        } catch (const std::exception& e) {
          fail("gen.counts." + it.key(), e.what());
        }
      }
    }
    if (v.gen.profile != "longtail" && v.gen.profile != "balanced" &&
        v.gen.profile != "explicit") {
      fail("gen.profile", "must be longtail, balanced, or explicit");
    }
  }
  if (j.contains("train")) from_json(j.at("train"), "train", &v.train);
  if (j.contains("sim")) from_json(j.at("sim"), "sim", &v.sim);
  if (j.contains("scaling")) from_json(j.at("scaling"), "scaling", &v.scaling);
  if (j.contains("rebalance")) from_json(j.at("rebalance"), "rebalance", &v.rebalance);
  if (j.contains("generalization")) {
    from_json(j.at("generalization"), "generalization", &v.generalization);
  }
  return v;
}

std::string dump_run_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

}  // namespace drivelab
