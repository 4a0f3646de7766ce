#include "drivelab/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "drivelab/rng.hpp"

namespace drivelab {

void TrainConfig::validate() const {
  if (lr <= 0.0 || batch_size <= 0 || steps < 0) {
    throw std::invalid_argument("train config: non-positive rate, batch, or steps");
  }
  model.validate();
}

double cosine_lr(double base, std::int64_t step, std::int64_t total_steps) {
  if (total_steps <= 1) return base;
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return base * 0.5 * (1.0 + std::cos(kPi * std::min(1.0, frac)));
}

namespace {

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

/// Fused, pooled, quantized raster input for a scene at t = 0.
std::vector<std::uint8_t> scene_raster_u8(const Scene& scene, const ModelConfig& cfg) {
  const RasterSpec& spec = cfg.raster;
  TemporalQueue queue(spec.queue_len);
  for (int k = spec.queue_len; k >= 1; --k) {
    const double t = -0.5 * k;
    queue.push(rasterize(scene, t, spec), scene.history_pose_at(t));
  }
  const BevRaster current = rasterize(scene, 0.0, spec);
  const auto fused = temporal_fuse(queue, current, scene.start_pose(), spec);
  const auto pooled = avg_pool(fused, cfg.fused_channels(), spec.height, spec.width, cfg.pool);
  std::vector<std::uint8_t> out(pooled.size());
  for (std::size_t i = 0; i < pooled.size(); ++i) out[i] = quantize(pooled[i]);
  return out;
}

}  // namespace

void build_context(const Scene& scene, double t, double ego_speed, float* out) {
  std::fill(out, out + kContextDim, 0.0f);
  out[static_cast<int>(scene.nav.command)] = 1.0f;
  out[6 + static_cast<int>(scene.traffic_light.state_at(t))] = 1.0f;
  out[9] = static_cast<float>(std::clamp(ego_speed / 30.0, 0.0, 1.0));
  out[10] = static_cast<float>(std::clamp(scene.nav.distance_to_intersection / 200.0, 0.0, 1.0));
  out[11 + static_cast<int>(scene.nav.target_road_class)] = 1.0f;
}

void build_scene_input(const Scene& scene, const ModelConfig& cfg, std::vector<float>* raster,
                       std::vector<float>* context) {
  const auto u8 = scene_raster_u8(scene, cfg);
  raster->resize(u8.size());
  for (std::size_t i = 0; i < u8.size(); ++i) {
    (*raster)[i] = static_cast<float>(u8[i]) / 255.0f;
  }
  context->assign(kContextDim, 0.0f);
  build_context(scene, 0.0, scene.start_speed(), context->data());
}

FeatureCache FeatureCache::build(const std::vector<Demonstration>& demos,
                                 const ModelConfig& cfg) {
  cfg.validate();
  FeatureCache cache;
  cache.config_ = cfg;
  cache.n_ = static_cast<int>(demos.size());
  const int rd = cfg.raster_dim();
  const int occ_dim = cfg.occ_dim();
  const int plan_dim = cfg.plan_len * 2;
  const int mot_dim = cfg.mot_dim();
  cache.raster_.assign(static_cast<std::size_t>(cache.n_) * rd, 0);
  cache.context_.assign(static_cast<std::size_t>(cache.n_) * kContextDim, 0.0f);
  cache.plan_.assign(static_cast<std::size_t>(cache.n_) * plan_dim, 0.0f);
  cache.occ_.assign(static_cast<std::size_t>(cache.n_) * occ_dim, 0);
  cache.map_.assign(static_cast<std::size_t>(cache.n_) * occ_dim, 0);
  cache.mot_.assign(static_cast<std::size_t>(cache.n_) * mot_dim, 0.0f);
  cache.mot_valid_.assign(static_cast<std::size_t>(cache.n_) * cfg.agent_slots, 0.0f);
  cache.futures_.resize(cache.n_);

#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < cache.n_; ++i) {
    const Scene& scene = demos[i].scene;
    const RasterSpec& spec = cfg.raster;
    const auto in = scene_raster_u8(scene, cfg);
    std::copy(in.begin(), in.end(), cache.raster_.begin() + static_cast<std::size_t>(i) * rd);
    build_context(scene, 0.0, scene.start_speed(),
                  cache.context_.data() + static_cast<std::size_t>(i) * kContextDim);

    // Plan label: expert future positions, clipped to the configured length.
    float* plan = cache.plan_.data() + static_cast<std::size_t>(i) * plan_dim;
    for (int k = 0; k < cfg.plan_len && k < static_cast<int>(demos[i].expert_future.size()); ++k) {
      plan[k * 2 + 0] = static_cast<float>(demos[i].expert_future.waypoints[k].pose.x);
      plan[k * 2 + 1] = static_cast<float>(demos[i].expert_future.waypoints[k].pose.y);
    }
    cache.futures_[i] = demos[i].expert_future;

    // Occupancy target: agent footprints 3 s ahead, rendered in the current
    // ego frame. Map target: the lane-center channel of the current raster.
    const Pose2 frame = scene.start_pose();
    const BevRaster occ_r = rasterize(scene, 3.0, frame, scene.start_speed(), spec);
    const BevRaster now_r = rasterize(scene, 0.0, frame, scene.start_speed(), spec);
    std::uint8_t* occ = cache.occ_.data() + static_cast<std::size_t>(i) * occ_dim;
    std::uint8_t* map = cache.map_.data() + static_cast<std::size_t>(i) * occ_dim;
    for (int j = 0; j < occ_dim; ++j) {
      occ[j] = quantize(occ_r.data[kChAgentsNow * occ_dim + j]);
      map[j] = quantize(now_r.data[kChLaneCenter * occ_dim + j]);
    }

    // Motion targets: displacement over 3 s of the nearest agents.
    struct Near {
      double d;
      int id;
      const AgentTrack* agent;
    };
    std::vector<Near> near;
    for (const AgentTrack& a : scene.agents) {
      const double d = dist(a.pose_at(0.0).position(), frame.position());
      if (d < 80.0) near.push_back({d, a.id, &a});
    }
    std::sort(near.begin(), near.end(), [](const Near& a, const Near& b) {
      return a.d != b.d ? a.d < b.d : a.id < b.id;
    });
    float* mot = cache.mot_.data() + static_cast<std::size_t>(i) * mot_dim;
    float* valid = cache.mot_valid_.data() + static_cast<std::size_t>(i) * cfg.agent_slots;
    for (int a = 0; a < cfg.agent_slots && a < static_cast<int>(near.size()); ++a) {
      const Vec2 disp = near[a].agent->pose_at(3.0).position() -
                        near[a].agent->pose_at(0.0).position();
      const Vec2 local = disp.rotated(-frame.heading);
      mot[a * 2 + 0] = static_cast<float>(local.x);
      mot[a * 2 + 1] = static_cast<float>(local.y);
      valid[a] = 1.0f;
    }
  }
  return cache;
}

void FeatureCache::fill_input(int i, float* raster, float* context) const {
  const int rd = config_.raster_dim();
  const std::uint8_t* src = raster_.data() + static_cast<std::size_t>(i) * rd;
  for (int j = 0; j < rd; ++j) raster[j] = static_cast<float>(src[j]) / 255.0f;
  std::copy(context_.begin() + static_cast<std::size_t>(i) * kContextDim,
            context_.begin() + static_cast<std::size_t>(i + 1) * kContextDim, context);
}

SampleLabels FeatureCache::labels(int i) const {
  SampleLabels lab;
  const int occ_dim = config_.occ_dim();
  const int plan_dim = config_.plan_len * 2;
  const int mot_dim = config_.mot_dim();
  lab.plan.assign(plan_.begin() + static_cast<std::size_t>(i) * plan_dim,
                  plan_.begin() + static_cast<std::size_t>(i + 1) * plan_dim);
  lab.occ.resize(occ_dim);
  lab.map.resize(occ_dim);
  const std::uint8_t* occ = occ_.data() + static_cast<std::size_t>(i) * occ_dim;
  const std::uint8_t* map = map_.data() + static_cast<std::size_t>(i) * occ_dim;
  for (int j = 0; j < occ_dim; ++j) {
    lab.occ[j] = static_cast<float>(occ[j]) / 255.0f;
    lab.map[j] = static_cast<float>(map[j]) / 255.0f;
  }
  lab.mot.assign(mot_.begin() + static_cast<std::size_t>(i) * mot_dim,
                 mot_.begin() + static_cast<std::size_t>(i + 1) * mot_dim);
  lab.mot_valid.assign(mot_valid_.begin() + static_cast<std::size_t>(i) * config_.agent_slots,
                       mot_valid_.begin() + static_cast<std::size_t>(i + 1) * config_.agent_slots);
  return lab;
}

std::string curve_csv(const std::vector<CurveRow>& curve) {
  std::string out = "step,lr,total,plan_l1,plan_ce,mot,occ,map,eval_ade\n";
  char buf[256];
  for (const CurveRow& r : curve) {
    std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(r.step), r.lr, r.loss.total, r.loss.plan_l1,
                  r.loss.plan_ce, r.loss.mot, r.loss.occ, r.loss.map, r.eval_metric);
    out += buf;
  }
  return out;
}

TrainResult train(const FeatureCache& cache, const std::vector<int>& indices,
                  const TrainConfig& cfg,
                  const std::function<double(const ModelParams&)>& eval_fn) {
  cfg.validate();
  if (indices.empty()) throw std::invalid_argument("train: empty dataset");
  const ModelConfig& model = cfg.model;
  const std::int64_t total_steps = cfg.effective_steps(static_cast<std::int64_t>(indices.size()));

  ModelParams params = init_params(model, cfg.seed);
  std::vector<float> grad(params.total(), 0.0f);
  std::vector<float> m(params.total(), 0.0f);
  std::vector<float> v(params.total(), 0.0f);
  Workspace ws;

  const int rd = model.raster_dim();
  std::vector<float> raster_batch(static_cast<std::size_t>(cfg.batch_size) * rd);
  std::vector<float> ctx_batch(static_cast<std::size_t>(cfg.batch_size) * kContextDim);
  std::vector<SampleLabels> labels(cfg.batch_size);

  Rng shuffle_rng(seed_combine(cfg.seed, 0x5423ULL));
  std::vector<int> order(indices);
  std::size_t cursor = order.size();  // trigger shuffle on first batch

  TrainResult result;
  std::int64_t epoch_boundary = 0;

  for (std::int64_t step = 0; step < total_steps; ++step) {
    int bsz = 0;
    for (; bsz < cfg.batch_size; ++bsz) {
      if (cursor >= order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) {
          const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
          std::swap(order[i - 1], order[j]);
        }
        cursor = 0;
        epoch_boundary = step;
      }
      const int idx = order[cursor++];
      cache.fill_input(idx, raster_batch.data() + static_cast<std::size_t>(bsz) * rd,
                       ctx_batch.data() + static_cast<std::size_t>(bsz) * kContextDim);
      labels[bsz] = cache.labels(idx);
    }

    std::fill(grad.begin(), grad.end(), 0.0f);
    LossBreakdown loss;
    try {
      loss = compute_batch(model, params, raster_batch.data(), ctx_batch.data(), labels.data(),
                           bsz, cfg.loss_weights, &grad, ws);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("training aborted at step " + std::to_string(step) + ": " +
                               e.what());
    }
    if (loss.total > 1e6) {
      throw std::runtime_error("training diverged at step " + std::to_string(step));
    }

    const double lr = cosine_lr(cfg.lr, step, total_steps);
    const double b1t = 1.0 - std::pow(cfg.beta1, static_cast<double>(step + 1));
    const double b2t = 1.0 - std::pow(cfg.beta2, static_cast<double>(step + 1));
    const float beta1 = static_cast<float>(cfg.beta1);
    const float beta2 = static_cast<float>(cfg.beta2);
    const float lr_f = static_cast<float>(lr);
    const float wd = static_cast<float>(cfg.weight_decay);
    const float eps = static_cast<float>(cfg.eps);
    const float inv_b1t = static_cast<float>(1.0 / b1t);
    const float inv_b2t = static_cast<float>(1.0 / b2t);
    float* w = params.values.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(params.total()); ++i) {
      m[i] = beta1 * m[i] + (1.0f - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0f - beta2) * grad[i] * grad[i];
      const float mhat = m[i] * inv_b1t;
      const float vhat = v[i] * inv_b2t;
      w[i] -= lr_f * (mhat / (std::sqrt(vhat) + eps) + wd * w[i]);
    }

    const bool epoch_end = cursor >= order.size();
    if (step % cfg.log_every == 0 || step + 1 == total_steps || (epoch_end && eval_fn)) {
      CurveRow row;
      row.step = step;
      row.lr = lr;
      row.loss = loss;
      if (eval_fn && (epoch_end || step + 1 == total_steps)) {
        row.eval_metric = eval_fn(params);
      }
      result.curve.push_back(row);
    }
    (void)epoch_boundary;
  }

  params.step = static_cast<std::uint64_t>(total_steps);
  result.params = std::move(params);
  return result;
}

}  // namespace drivelab
