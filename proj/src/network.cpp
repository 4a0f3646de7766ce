#include "drivelab/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "drivelab/rng.hpp"

namespace drivelab {

void ModelConfig::validate() const {
  raster.validate();
  if (pool <= 0 || raster.height % pool != 0 || raster.width % pool != 0) {
    throw std::invalid_argument("model: raster dimensions must divide by pool factor");
  }
  if (hidden <= 0 || gating_hidden <= 0 || modes <= 0 || plan_len <= 0 || agent_slots <= 0) {
    throw std::invalid_argument("model: non-positive dimension");
  }
}

std::string ModelConfig::canonical_string() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "c%d h%d w%d res%.6f ax%d ay%d k%d vmax%.6f pool%d hidden%d gh%d m%d len%d slots%d",
                raster.channels, raster.height, raster.width, raster.resolution, raster.anchor_x,
                raster.anchor_y, raster.queue_len, raster.max_speed, pool, hidden, gating_hidden,
                modes, plan_len, agent_slots);
  return buf;
}

std::uint64_t ModelConfig::hash() const {
  const std::string s = canonical_string();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

float* ModelParams::seg(const std::string& name) {
  for (const ParamSegment& s : segments) {
    if (s.name == name) return values.data() + s.offset;
  }
  throw std::invalid_argument("unknown parameter segment: " + name);
}

const float* ModelParams::seg(const std::string& name) const {
  for (const ParamSegment& s : segments) {
    if (s.name == name) return values.data() + s.offset;
  }
  throw std::invalid_argument("unknown parameter segment: " + name);
}

ModelParams make_params(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams p;
  p.config_hash = cfg.hash();
  std::size_t offset = 0;
  auto add = [&](const std::string& name, std::size_t count) {
    p.segments.push_back({name, offset, count});
    offset += count;
  };
  const std::size_t cf = cfg.fused_channels();
  const std::size_t gh = cfg.gating_hidden;
  add("gate_w1", cf * gh);
  add("gate_b1", gh);
  add("gate_w2", gh * cf);
  add("gate_b2", cf);
  add("trunk_w1", static_cast<std::size_t>(cfg.input_dim()) * cfg.hidden);
  add("trunk_b1", cfg.hidden);
  add("trunk_w2", static_cast<std::size_t>(cfg.hidden) * cfg.hidden);
  add("trunk_b2", cfg.hidden);
  add("plan_w", static_cast<std::size_t>(cfg.hidden) * cfg.plan_dim());
  add("plan_b", cfg.plan_dim());
  add("conf_w", static_cast<std::size_t>(cfg.hidden) * cfg.modes);
  add("conf_b", cfg.modes);
  add("occ_w", static_cast<std::size_t>(cfg.hidden) * cfg.occ_dim());
  add("occ_b", cfg.occ_dim());
  add("map_w", static_cast<std::size_t>(cfg.hidden) * cfg.occ_dim());
  add("map_b", cfg.occ_dim());
  add("mot_w", static_cast<std::size_t>(cfg.hidden) * cfg.mot_dim());
  add("mot_b", cfg.mot_dim());
  p.values.assign(offset, 0.0f);
  return p;
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams p = make_params(cfg);
  p.seed = seed;
  Rng rng(seed_combine(seed, 0x1417ULL));
  auto fill = [&](const char* name, std::size_t fan_in) {
    float* w = p.seg(name);
    std::size_t count = 0;
    for (const ParamSegment& s : p.segments) {
      if (s.name == name) count = s.count;
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) {
      w[i] = static_cast<float>(rng.normal() * scale);
    }
  };
  fill("gate_w1", cfg.fused_channels());
  fill("gate_w2", cfg.gating_hidden);
  fill("trunk_w1", cfg.input_dim());
  fill("trunk_w2", cfg.hidden);
  fill("plan_w", cfg.hidden);
  fill("conf_w", cfg.hidden);
  fill("occ_w", cfg.hidden);
  fill("map_w", cfg.hidden);
  fill("mot_w", cfg.hidden);
  return p;
}

namespace {

constexpr char kMagic[4] = {'D', 'L', 'C', 'K'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, 4);
  put<std::uint32_t>(out, 1);
  put<std::uint64_t>(out, params.config_hash);
  put<std::uint64_t>(out, params.seed);
  put<std::uint64_t>(out, params.step);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.segments.size()));
  for (const ParamSegment& s : params.segments) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.name.size()));
    out.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
    put<std::uint64_t>(out, s.offset);
    put<std::uint64_t>(out, s.count);
  }
  out.write(reinterpret_cast<const char*>(params.values.data()),
            static_cast<std::streamsize>(params.values.size() * sizeof(float)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path, const ModelConfig& expected_config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  const auto version = get<std::uint32_t>(in);
  if (version != 1) throw std::runtime_error("checkpoint: unsupported version");
  ModelParams p = make_params(expected_config);
  const auto hash = get<std::uint64_t>(in);
  if (hash != expected_config.hash()) {
    throw std::runtime_error("checkpoint: config hash mismatch in " + path);
  }
  p.config_hash = hash;
  p.seed = get<std::uint64_t>(in);
  p.step = get<std::uint64_t>(in);
  const auto n_seg = get<std::uint32_t>(in);
  if (n_seg != p.segments.size()) throw std::runtime_error("checkpoint: segment count mismatch");
  for (const ParamSegment& expect : p.segments) {
    const auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto offset = get<std::uint64_t>(in);
    const auto count = get<std::uint64_t>(in);
    if (name != expect.name || offset != expect.offset || count != expect.count) {
      throw std::runtime_error("checkpoint: segment layout mismatch at " + name);
    }
  }
  in.read(reinterpret_cast<char*>(p.values.data()),
          static_cast<std::streamsize>(p.values.size() * sizeof(float)));
  if (!in) throw std::runtime_error("checkpoint: truncated parameter data");
  return p;
}

// ---------------------------------------------------------------------------
// Dense kernels. Each output element is produced by exactly one thread with a
// fixed-order inner loop, so results are identical for any thread count.
// ---------------------------------------------------------------------------

namespace {

void mat_forward(const float* X, const float* W, const float* b, float* Y, int B, int M, int N) {
#pragma omp parallel for schedule(static)
  for (int s = 0; s < B; ++s) {
    float* y = Y + static_cast<std::size_t>(s) * N;
    if (b) {
      std::copy(b, b + N, y);
    } else {
      std::fill(y, y + N, 0.0f);
    }
    const float* x = X + static_cast<std::size_t>(s) * M;
    for (int i = 0; i < M; ++i) {
      const float xv = x[i];
      if (xv == 0.0f) continue;
      const float* w = W + static_cast<std::size_t>(i) * N;
#pragma omp simd
      for (int j = 0; j < N; ++j) y[j] += xv * w[j];
    }
  }
}

void mat_grad_w(const float* X, const float* dY, float* dW, int B, int M, int N) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M; ++i) {
    float* dw = dW + static_cast<std::size_t>(i) * N;
    for (int s = 0; s < B; ++s) {
      const float xv = X[static_cast<std::size_t>(s) * M + i];
      if (xv == 0.0f) continue;
      const float* dy = dY + static_cast<std::size_t>(s) * N;
#pragma omp simd
      for (int j = 0; j < N; ++j) dw[j] += xv * dy[j];
    }
  }
}

void mat_grad_b(const float* dY, float* db, int B, int N) {
  for (int s = 0; s < B; ++s) {
    const float* dy = dY + static_cast<std::size_t>(s) * N;
#pragma omp simd
    for (int j = 0; j < N; ++j) db[j] += dy[j];
  }
}

void mat_grad_x(const float* dY, const float* W, float* dX, int B, int M, int N) {
#pragma omp parallel for schedule(static)
  for (int s = 0; s < B; ++s) {
    const float* dy = dY + static_cast<std::size_t>(s) * N;
    float* dx = dX + static_cast<std::size_t>(s) * M;
    for (int i = 0; i < M; ++i) {
      const float* w = W + static_cast<std::size_t>(i) * N;
      float acc = 0.0f;
#pragma omp simd reduction(+ : acc)
      for (int j = 0; j < N; ++j) acc += dy[j] * w[j];
      dx[i] = acc;
    }
  }
}

void tanh_inplace(float* a, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    a[i] = std::tanh(a[i]);
  }
}

double stable_bce(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct Views {
  const float *gw1, *gb1, *gw2, *gb2, *w1, *b1, *w2, *b2;
  const float *pw, *pb, *cw, *cb, *ow, *ob, *mw, *mb, *aw, *ab;
  explicit Views(const ModelParams& p)
      : gw1(p.seg("gate_w1")),
        gb1(p.seg("gate_b1")),
        gw2(p.seg("gate_w2")),
        gb2(p.seg("gate_b2")),
        w1(p.seg("trunk_w1")),
        b1(p.seg("trunk_b1")),
        w2(p.seg("trunk_w2")),
        b2(p.seg("trunk_b2")),
        pw(p.seg("plan_w")),
        pb(p.seg("plan_b")),
        cw(p.seg("conf_w")),
        cb(p.seg("conf_b")),
        ow(p.seg("occ_w")),
        ob(p.seg("occ_b")),
        mw(p.seg("map_w")),
        mb(p.seg("map_b")),
        aw(p.seg("mot_w")),
        ab(p.seg("mot_b")) {}
};

struct GradViews {
  float *gw1, *gb1, *gw2, *gb2, *w1, *b1, *w2, *b2;
  float *pw, *pb, *cw, *cb, *ow, *ob, *mw, *mb, *aw, *ab;
  GradViews(const ModelParams& layout, std::vector<float>* grad) {
    auto at = [&](const char* name) -> float* {
      for (const ParamSegment& s : layout.segments) {
        if (s.name == name) return grad->data() + s.offset;
      }
      throw std::invalid_argument(std::string("segment not found: ") + name);
    };
    gw1 = at("gate_w1");
    gb1 = at("gate_b1");
    gw2 = at("gate_w2");
    gb2 = at("gate_b2");
    w1 = at("trunk_w1");
    b1 = at("trunk_b1");
    w2 = at("trunk_w2");
    b2 = at("trunk_b2");
    pw = at("plan_w");
    pb = at("plan_b");
    cw = at("conf_w");
    cb = at("conf_b");
    ow = at("occ_w");
    ob = at("occ_b");
    mw = at("map_w");
    mb = at("map_b");
    aw = at("mot_w");
    ab = at("mot_b");
  }
};

void ensure_workspace(Workspace& ws, const ModelConfig& cfg, int B) {
  const auto resize = [](std::vector<float>& v, std::size_t n) { v.assign(n, 0.0f); };
  const std::size_t b = static_cast<std::size_t>(B);
  resize(ws.x, b * cfg.input_dim());
  resize(ws.a1, b * cfg.hidden);
  resize(ws.h1, b * cfg.hidden);
  resize(ws.a2, b * cfg.hidden);
  resize(ws.h2, b * cfg.hidden);
  resize(ws.plan_out, b * cfg.plan_dim());
  resize(ws.conf_out, b * cfg.modes);
  resize(ws.occ_out, b * cfg.occ_dim());
  resize(ws.map_out, b * cfg.occ_dim());
  resize(ws.mot_out, b * cfg.mot_dim());
  resize(ws.d_h1, b * cfg.hidden);
  resize(ws.d_h2, b * cfg.hidden);
  resize(ws.d_plan, b * cfg.plan_dim());
  resize(ws.d_conf, b * cfg.modes);
  resize(ws.d_occ, b * cfg.occ_dim());
  resize(ws.d_map, b * cfg.occ_dim());
  resize(ws.d_mot, b * cfg.mot_dim());
  resize(ws.d_x, b * cfg.input_dim());
  resize(ws.means, b * cfg.fused_channels());
  resize(ws.gate_h, b * cfg.gating_hidden);
  resize(ws.gate_s, b * cfg.fused_channels());
}

/// Fills ws activations for a batch: gating, scaled input, trunk, heads.
void forward_batch(const ModelConfig& cfg, const Views& v, const float* raster_batch,
                   const float* context_batch, int B, Workspace& ws) {
  const int cf = cfg.fused_channels();
  const int cells = cfg.cells_per_channel();
  const int rd = cfg.raster_dim();
  const int gh = cfg.gating_hidden;

  for (int s = 0; s < B; ++s) {
    const float* xr = raster_batch + static_cast<std::size_t>(s) * rd;
    float* means = ws.means.data() + static_cast<std::size_t>(s) * cf;
    for (int c = 0; c < cf; ++c) {
      float acc = 0.0f;
      const float* block = xr + static_cast<std::size_t>(c) * cells;
#pragma omp simd reduction(+ : acc)
      for (int i = 0; i < cells; ++i) acc += block[i];
      means[c] = acc / static_cast<float>(cells);
    }
    // Gating: channel means -> tanh bottleneck -> sigmoid scales.
    float* g1 = ws.gate_h.data() + static_cast<std::size_t>(s) * gh;
    for (int j = 0; j < gh; ++j) {
      float acc = v.gb1[j];
      for (int c = 0; c < cf; ++c) acc += means[c] * v.gw1[c * gh + j];
      g1[j] = std::tanh(acc);
    }
    float* sc = ws.gate_s.data() + static_cast<std::size_t>(s) * cf;
    for (int c = 0; c < cf; ++c) {
      float acc = v.gb2[c];
      for (int j = 0; j < gh; ++j) acc += g1[j] * v.gw2[j * cf + c];
      sc[c] = 1.0f / (1.0f + std::exp(-acc));
    }
    float* x = ws.x.data() + static_cast<std::size_t>(s) * cfg.input_dim();
    for (int c = 0; c < cf; ++c) {
      const float scale = sc[c];
      const float* block = xr + static_cast<std::size_t>(c) * cells;
      float* xb = x + static_cast<std::size_t>(c) * cells;
#pragma omp simd
      for (int i = 0; i < cells; ++i) xb[i] = block[i] * scale;
    }
    const float* ctx = context_batch + static_cast<std::size_t>(s) * kContextDim;
    std::copy(ctx, ctx + kContextDim, x + rd);
  }

  mat_forward(ws.x.data(), v.w1, v.b1, ws.a1.data(), B, cfg.input_dim(), cfg.hidden);
  ws.h1 = ws.a1;
  tanh_inplace(ws.h1.data(), ws.h1.size());
  mat_forward(ws.h1.data(), v.w2, v.b2, ws.a2.data(), B, cfg.hidden, cfg.hidden);
  ws.h2 = ws.a2;
  tanh_inplace(ws.h2.data(), ws.h2.size());
  mat_forward(ws.h2.data(), v.pw, v.pb, ws.plan_out.data(), B, cfg.hidden, cfg.plan_dim());
  mat_forward(ws.h2.data(), v.cw, v.cb, ws.conf_out.data(), B, cfg.hidden, cfg.modes);
  mat_forward(ws.h2.data(), v.ow, v.ob, ws.occ_out.data(), B, cfg.hidden, cfg.occ_dim());
  mat_forward(ws.h2.data(), v.mw, v.mb, ws.map_out.data(), B, cfg.hidden, cfg.occ_dim());
  mat_forward(ws.h2.data(), v.aw, v.ab, ws.mot_out.data(), B, cfg.hidden, cfg.mot_dim());
}

std::vector<double> softmax_of(const float* logits, int n) {
  double mx = -1e300;
  for (int i = 0; i < n; ++i) mx = std::max(mx, static_cast<double>(logits[i]));
  std::vector<double> p(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - mx);
    sum += p[i];
  }
  for (int i = 0; i < n; ++i) p[i] /= sum;
  return p;
}

}  // namespace

ForwardOutputs forward(const ModelConfig& cfg, const ModelParams& params, const float* raster,
                       const float* context) {
  const Views v(params);
  thread_local Workspace ws;
  ensure_workspace(ws, cfg, 1);
  forward_batch(cfg, v, raster, context, 1, ws);

  ForwardOutputs out;
  out.plan.offsets.assign(ws.plan_out.begin(), ws.plan_out.begin() + cfg.plan_dim());
  out.plan.confidences = softmax_of(ws.conf_out.data(), cfg.modes);
  out.occ_logits.assign(ws.occ_out.begin(), ws.occ_out.begin() + cfg.occ_dim());
  out.map_logits.assign(ws.map_out.begin(), ws.map_out.begin() + cfg.occ_dim());
  out.motion.assign(ws.mot_out.begin(), ws.mot_out.begin() + cfg.mot_dim());
  return out;
}

LossBreakdown compute_batch(const ModelConfig& cfg, const ModelParams& params,
                            const float* raster_batch, const float* context_batch,
                            const SampleLabels* labels, int B, const LossWeights& weights,
                            std::vector<float>* grad, Workspace& ws) {
  const Views v(params);
  ensure_workspace(ws, cfg, B);
  forward_batch(cfg, v, raster_batch, context_batch, B, ws);

  const int plan_dim = cfg.plan_dim();
  const int plan_coords = cfg.plan_len * 2;
  const int occ_dim = cfg.occ_dim();
  const int mot_dim = cfg.mot_dim();
  const double inv_b = 1.0 / static_cast<double>(B);

  LossBreakdown loss;

  for (int s = 0; s < B; ++s) {
    const SampleLabels& lab = labels[s];
    const float* plan = ws.plan_out.data() + static_cast<std::size_t>(s) * plan_dim;
    const float* conf = ws.conf_out.data() + static_cast<std::size_t>(s) * cfg.modes;
    const float* occ = ws.occ_out.data() + static_cast<std::size_t>(s) * occ_dim;
    const float* map = ws.map_out.data() + static_cast<std::size_t>(s) * occ_dim;
    const float* mot = ws.mot_out.data() + static_cast<std::size_t>(s) * mot_dim;
    float* d_plan = ws.d_plan.data() + static_cast<std::size_t>(s) * plan_dim;
    float* d_conf = ws.d_conf.data() + static_cast<std::size_t>(s) * cfg.modes;
    float* d_occ = ws.d_occ.data() + static_cast<std::size_t>(s) * occ_dim;
    float* d_map = ws.d_map.data() + static_cast<std::size_t>(s) * occ_dim;
    float* d_mot = ws.d_mot.data() + static_cast<std::size_t>(s) * mot_dim;

    // Winner-takes-all: L1 of the closest mode, cross-entropy on its index.
    int winner = 0;
    double best = 1e300;
    for (int m = 0; m < cfg.modes; ++m) {
      double l1 = 0.0;
      for (int j = 0; j < plan_coords; ++j) {
        l1 += std::abs(static_cast<double>(plan[m * plan_coords + j]) - lab.plan[j]);
      }
      l1 /= plan_coords;
      if (l1 < best - 1e-12) {
        best = l1;
        winner = m;
      }
    }
    loss.plan_l1 += best * inv_b;
    const auto probs = softmax_of(conf, cfg.modes);
    loss.plan_ce += -std::log(std::max(probs[winner], 1e-300)) * inv_b;
    const double plan_scale = weights.plan * inv_b / plan_coords;
    for (int j = 0; j < plan_coords; ++j) {
      const double diff = static_cast<double>(plan[winner * plan_coords + j]) - lab.plan[j];
      d_plan[winner * plan_coords + j] =
          static_cast<float>(plan_scale * (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)));
    }
    for (int m = 0; m < cfg.modes; ++m) {
      d_conf[m] =
          static_cast<float>(weights.plan * inv_b * (probs[m] - (m == winner ? 1.0 : 0.0)));
    }

    double occ_sum = 0.0, map_sum = 0.0;
    const double occ_scale = weights.occ * inv_b / occ_dim;
    const double map_scale = weights.map * inv_b / occ_dim;
    for (int j = 0; j < occ_dim; ++j) {
      const double zo = occ[j], yo = lab.occ[j];
      occ_sum += stable_bce(zo, yo);
      d_occ[j] = static_cast<float>(occ_scale * (1.0 / (1.0 + std::exp(-zo)) - yo));
      const double zm = map[j], ym = lab.map[j];
      map_sum += stable_bce(zm, ym);
      d_map[j] = static_cast<float>(map_scale * (1.0 / (1.0 + std::exp(-zm)) - ym));
    }
    loss.occ += occ_sum / occ_dim * inv_b;
    loss.map += map_sum / occ_dim * inv_b;

    double n_valid = 0.0;
    for (int a = 0; a < cfg.agent_slots; ++a) n_valid += lab.mot_valid[a];
    const double denom = std::max(1.0, n_valid) * 2.0;
    double mot_sum = 0.0;
    for (int a = 0; a < cfg.agent_slots; ++a) {
      for (int j = 0; j < 2; ++j) {
        const double diff = static_cast<double>(mot[a * 2 + j]) - lab.mot[a * 2 + j];
        mot_sum += lab.mot_valid[a] * std::abs(diff);
        d_mot[a * 2 + j] =
            static_cast<float>(weights.mot * inv_b * lab.mot_valid[a] *
                               (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) / denom);
      }
    }
    loss.mot += mot_sum / denom * inv_b;
  }

  loss.total = weights.plan * (loss.plan_l1 + loss.plan_ce) + weights.mot * loss.mot +
               weights.occ * loss.occ + weights.map * loss.map;
  if (!std::isfinite(loss.total)) {
    throw std::runtime_error("non-finite loss");
  }
  if (!grad) return loss;

  GradViews g(params, grad);
  const int hidden = cfg.hidden;
  const int cf = cfg.fused_channels();
  const int cells = cfg.cells_per_channel();
  const int rd = cfg.raster_dim();
  const int gh = cfg.gating_hidden;

  std::fill(ws.d_h2.begin(), ws.d_h2.end(), 0.0f);
  std::vector<float> tmp(static_cast<std::size_t>(B) * hidden);
  auto add_head = [&](const float* dY, const float* W, float* dW, float* db, int N) {
    mat_grad_w(ws.h2.data(), dY, dW, B, hidden, N);
    mat_grad_b(dY, db, B, N);
    mat_grad_x(dY, W, tmp.data(), B, hidden, N);
    for (std::size_t i = 0; i < ws.d_h2.size(); ++i) ws.d_h2[i] += tmp[i];
  };
  add_head(ws.d_plan.data(), v.pw, g.pw, g.pb, plan_dim);
  add_head(ws.d_conf.data(), v.cw, g.cw, g.cb, cfg.modes);
  add_head(ws.d_occ.data(), v.ow, g.ow, g.ob, occ_dim);
  add_head(ws.d_map.data(), v.mw, g.mw, g.mb, occ_dim);
  add_head(ws.d_mot.data(), v.aw, g.aw, g.ab, mot_dim);

  for (std::size_t i = 0; i < ws.d_h2.size(); ++i) {
    ws.d_h2[i] *= 1.0f - ws.h2[i] * ws.h2[i];
  }
  mat_grad_w(ws.h1.data(), ws.d_h2.data(), g.w2, B, hidden, hidden);
  mat_grad_b(ws.d_h2.data(), g.b2, B, hidden);
  mat_grad_x(ws.d_h2.data(), v.w2, ws.d_h1.data(), B, hidden, hidden);

  for (std::size_t i = 0; i < ws.d_h1.size(); ++i) {
    ws.d_h1[i] *= 1.0f - ws.h1[i] * ws.h1[i];
  }
  mat_grad_w(ws.x.data(), ws.d_h1.data(), g.w1, B, cfg.input_dim(), hidden);
  mat_grad_b(ws.d_h1.data(), g.b1, B, hidden);
  mat_grad_x(ws.d_h1.data(), v.w1, ws.d_x.data(), B, cfg.input_dim(), hidden);

  // Gating backward, per sample (ws.gate_s is reused to hold dz2).
  for (int s = 0; s < B; ++s) {
    const float* xr = raster_batch + static_cast<std::size_t>(s) * rd;
    const float* dx = ws.d_x.data() + static_cast<std::size_t>(s) * cfg.input_dim();
    float* sc = ws.gate_s.data() + static_cast<std::size_t>(s) * cf;
    const float* g1 = ws.gate_h.data() + static_cast<std::size_t>(s) * gh;
    const float* means = ws.means.data() + static_cast<std::size_t>(s) * cf;
    for (int c = 0; c < cf; ++c) {
      float ds = 0.0f;
      const float* xb = xr + static_cast<std::size_t>(c) * cells;
      const float* dxb = dx + static_cast<std::size_t>(c) * cells;
#pragma omp simd reduction(+ : ds)
      for (int i = 0; i < cells; ++i) ds += dxb[i] * xb[i];
      const float dz2 = ds * sc[c] * (1.0f - sc[c]);
      g.gb2[c] += dz2;
      for (int j = 0; j < gh; ++j) {
        g.gw2[j * cf + c] += g1[j] * dz2;
      }
      sc[c] = dz2;
    }
    for (int j = 0; j < gh; ++j) {
      float dg1 = 0.0f;
      for (int c = 0; c < cf; ++c) dg1 += v.gw2[j * cf + c] * sc[c];
      const float dz1 = dg1 * (1.0f - g1[j] * g1[j]);
      g.gb1[j] += dz1;
      for (int c = 0; c < cf; ++c) {
        g.gw1[c * gh + j] += means[c] * dz1;
      }
    }
  }

  return loss;
}

}  // namespace drivelab
