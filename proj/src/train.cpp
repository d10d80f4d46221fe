// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/train.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "liveaction/autodiff.hpp"
#include "liveaction/bytes.hpp"
#include "liveaction/pointwise.hpp"
#include "liveaction/wavelet.hpp"

namespace lva {

namespace {

constexpr std::uint8_t kCheckpointMagic[4] = {'L', 'V', 'C', 'K'};
constexpr std::uint8_t kCheckpointVersion = 1;

std::uint64_t step_seed(std::uint64_t seed, std::int64_t step, std::uint64_t stream) {
  return splitmix64(splitmix64(seed ^ (stream * 0xd1b54a32d192ed03ULL)) + static_cast<std::uint64_t>(step));
}

double learning_rate_at(const TrainConfig& cfg, std::int64_t step) {
  if (!cfg.cosine_decay) return cfg.learning_rate;
  const double t = static_cast<double>(step) / static_cast<double>(cfg.total_steps);
  return cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

Shape parse_extents(const KeyValue& kv) {
  Shape out;
  std::stringstream ss(kv.value);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    KeyValue item{kv.key, part, kv.line};
    const int v = parse_int(item);
    if (v <= 0) throw Error(ErrorCode::Config, "line " + std::to_string(kv.line) + ": extents must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty() || out.size() > 3)
    throw Error(ErrorCode::Config, "line " + std::to_string(kv.line) + ": expected 1 to 3 extents like 64x64");
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(hard_switch_fraction > 0.0 && hard_switch_fraction < 1.0))
    throw Error(ErrorCode::Config, "hard_switch_fraction must lie in (0, 1)");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::Config, "lambda must be non-negative");
  if (total_steps < 1) throw Error(ErrorCode::Config, "total_steps must be positive");
  if (batch_size < 1) throw Error(ErrorCode::Config, "batch_size must be positive");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::Config, "learning_rate must be positive");
  if (epoch_steps < 1) throw Error(ErrorCode::Config, "epoch_steps must be positive");
}

const char* phase_name(Phase p) { return p == Phase::Soft ? "soft" : "hard"; }

std::int64_t hard_switch_step(const TrainConfig& cfg) {
  // The small offset keeps products like 0.7 * 1000 from rounding up a step.
  return static_cast<std::int64_t>(
      std::ceil(cfg.hard_switch_fraction * static_cast<double>(cfg.total_steps) - 1e-9));
}

Phase schedule_phase(std::int64_t step, const TrainConfig& cfg) {
  return step < hard_switch_step(cfg) ? Phase::Soft : Phase::HardFrozenEncoder;
}

RdLossTerms rd_loss_terms(const Tensor& x, const Tensor& x_hat, const Tensor& latents_phi, double lambda) {
  if (x.shape() != x_hat.shape()) throw Error(ErrorCode::Shape, "loss: x and x_hat shapes differ");
  RdLossTerms t;
  for (std::size_t i = 0; i < x.size(); ++i) t.sse += (x[i] - x_hat[i]) * (x[i] - x_hat[i]);
  t.variance = variance(latents_phi);
  t.loss = std::log10(std::max(t.sse, 1e-12)) + lambda * std::log2(std::max(t.variance, 1e-9));
  return t;
}

double rd_loss(const Tensor& x, const Tensor& x_hat, const Tensor& latents_phi, double lambda) {
  return rd_loss_terms(x, x_hat, latents_phi, lambda).loss;
}

TrainState init_train_state(ModelParams params) {
  TrainState s;
  s.params = std::move(params);
  for (std::size_t i = 0; i < s.params.weights.size(); ++i) {
    s.optim.m.emplace_back(s.params.weights.value(i).shape());
    s.optim.v.emplace_back(s.params.weights.value(i).shape());
  }
  return s;
}

Tensor encode_latents(const ModelParams& m, const Tensor& x) {
  const auto& cfg = m.config;
  const Tensor bands = compand(wpt_forward(x, cfg.wpt()), cfg.compander);
  return latent_cdf(analysis_forward(bands, m.weights, cfg.arch), m.sigma());
}

Tensor reconstruct_hard(const ModelParams& m, const Tensor& x) {
  const auto& cfg = m.config;
  const Tensor q = quantize_hard(encode_latents(m, x));
  const Tensor z = latent_cdf_inverse(q, m.sigma());
  const Tensor bands = compand_inverse(synthesis_forward(z, m.weights, cfg.arch), cfg.compander);
  return wpt_inverse(bands, cfg.wpt(), x.shape());
}

StepStats train_step(TrainState& state, const std::vector<Tensor>& batch, const TrainConfig& cfg) {
  cfg.validate();
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "empty training batch");
  ModelParams& model = state.params;
  const CodecConfig& codec = model.config;
  const WptConfig wpt = codec.wpt();
  state.phase = schedule_phase(state.step, cfg);
  const bool hard = state.phase == Phase::HardFrozenEncoder;

  ad::Graph g;
  const ad::BoundParams params(g, model.weights, [hard](const std::string& name) {
    return !(hard && is_encoder_param(name));
  });
  const ad::Var log_sigma = params[kLogSigma];
  Rng noise_rng(step_seed(cfg.seed, state.step, 1));

  std::vector<ad::Var> recon, latents;
  for (const Tensor& x : batch) {
    const Tensor bands = compand(wpt_forward(x, wpt), codec.compander);
    ad::Var q;
    if (hard) {
      const Tensor phi = latent_cdf(analysis_forward(bands, model.weights, codec.arch), model.sigma());
      latents.push_back(g.constant(phi));
      q = g.constant(quantize_hard(phi));
    } else {
      const ad::Var z = ad::analysis(g, g.constant(bands), params, codec.arch);
      const ad::Var phi = ad::latent_cdf(g, z, log_sigma);
      latents.push_back(phi);
      Tensor noise(g.value(phi).shape());
      for (auto& u : noise.data()) u = noise_rng.uniform() - 0.5;
      q = ad::add_noise(g, phi, noise);
    }
    const ad::Var zhat = ad::latent_cdf_inverse(g, q, log_sigma);
    const ad::Var yhat = ad::compand_inverse(g, ad::synthesis(g, zhat, params, codec.arch), codec.compander);
    recon.push_back(ad::wpt_inverse(g, yhat, wpt, x.shape()));
  }
  const ad::Var loss = ad::rd_loss(g, recon, batch, latents, cfg.lambda);
  g.backward(loss);

  StepStats stats;
  stats.step = state.step;
  stats.phase = state.phase;
  stats.loss = g.value(loss)[0];
  std::size_t elements = 0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Tensor& xh = g.value(recon[s]);
    for (std::size_t i = 0; i < xh.size(); ++i) stats.sse += (xh[i] - batch[s][i]) * (xh[i] - batch[s][i]);
    elements += xh.size();
  }
  stats.mse = stats.sse / static_cast<double>(elements);
  {
    double mean = 0.0, n = 0.0, acc = 0.0;
    for (auto z : latents)
      for (double v : g.value(z).data()) mean += v, n += 1.0;
    mean /= n;
    for (auto z : latents)
      for (double v : g.value(z).data()) acc += (v - mean) * (v - mean);
    stats.variance = acc / n;
  }

  // Adam with bias correction; frozen parameters keep weights and moments.
  const double lr = learning_rate_at(cfg, state.step);
  stats.learning_rate = lr;
  AdamState& opt = state.optim;
  opt.t += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.t));
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    if (!g.requires_grad(params.at(i))) continue;
    const Tensor grad = g.grad(params.at(i));
    Tensor& w = model.weights.value(i);
    Tensor& m = opt.m[i];
    Tensor& v = opt.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * grad[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * grad[j] * grad[j];
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg.adam_eps);
    }
  }
  state.step += 1;
  state.phase = schedule_phase(std::min(state.step, cfg.total_steps), cfg);
  return stats;
}

// ---------------------------------------------------------------------------

Tensor SyntheticSines::sample(Rng& rng, const Shape& extents) {
  if (extents.size() != 1) throw Error(ErrorCode::Config, "synthetic sines are one-dimensional");
  const std::size_t n = extents[0];
  Tensor x({1, n});
  std::fill(x.data().begin(), x.data().end(), 0.5);
  for (int k = 0; k < 3; ++k) {
    const double amp = rng.uniform(0.05, 0.15);
    const double cycles = rng.uniform(1.0, 20.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t t = 0; t < n; ++t)
      x[t] += amp * std::sin(2.0 * std::numbers::pi * cycles * static_cast<double>(t) / static_cast<double>(n) + phase);
  }
  return x;
}

TensorCrops::TensorCrops(Tensor source) : source_(std::move(source)) { check_signal_shape(source_.shape()); }

Tensor TensorCrops::sample(Rng& rng, const Shape& extents) {
  const Shape& s = source_.shape();
  if (extents.size() + 1 != s.size())
    throw Error(ErrorCode::Shape, "crop extents " + shape_string(extents) + " do not match source " + shape_string(s));
  Shape origin(extents.size());
  for (std::size_t a = 0; a < extents.size(); ++a) {
    if (extents[a] > s[a + 1])
      throw Error(ErrorCode::Shape, "crop extents " + shape_string(extents) + " exceed source " + shape_string(s));
    origin[a] = static_cast<std::size_t>(rng.below(s[a + 1] - extents[a] + 1));
  }
  Shape out_shape{s[0]};
  out_shape.insert(out_shape.end(), extents.begin(), extents.end());
  Tensor out(out_shape);
  std::vector<std::size_t> idx(out_shape.size(), 0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    std::size_t src = idx[0];
    for (std::size_t a = 1; a < s.size(); ++a) src = src * s[a] + origin[a - 1] + idx[a];
    out[n] = source_[src];
    for (std::size_t a = idx.size(); a-- > 0;) {
      if (++idx[a] < out_shape[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

ExperimentConfig parse_experiment(std::string_view text) {
  ExperimentConfig cfg;
  bool saw_dims = false;
  bool saw_extents = false;
  for (const KeyValue& kv : parse_key_value(text)) {
    if (kv.key == "dims") saw_dims = true;
    if (apply_codec_key(cfg.codec, kv)) continue;
    auto& t = cfg.train;
    if (kv.key == "lambda") t.lambda = parse_double(kv);
    else if (kv.key == "total_steps") t.total_steps = parse_int(kv);
    else if (kv.key == "hard_switch_fraction") t.hard_switch_fraction = parse_double(kv);
    else if (kv.key == "batch_size") t.batch_size = parse_int(kv);
    else if (kv.key == "learning_rate") t.learning_rate = parse_double(kv);
    else if (kv.key == "cosine_decay") t.cosine_decay = parse_bool(kv);
    else if (kv.key == "seed") t.seed = static_cast<std::uint64_t>(parse_int(kv));
    else if (kv.key == "epoch_steps") t.epoch_steps = parse_int(kv);
    else if (kv.key == "data") cfg.data = kv.value;
    else if (kv.key == "extents") {
      cfg.extents = parse_extents(kv);
      saw_extents = true;
    }
    else if (kv.key == "log_every") cfg.log_every = parse_int(kv);
    else if (kv.key == "resolution_schedule") {
      // step:extents entries separated by commas, e.g. "0:32x32,500:64x64"
      std::stringstream ss(kv.value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
          throw Error(ErrorCode::Config, "line " + std::to_string(kv.line) + ": expected step:extents");
        ResolutionStage st;
        st.step = parse_int(KeyValue{kv.key, item.substr(0, colon), kv.line});
        st.extents = parse_extents(KeyValue{kv.key, item.substr(colon + 1), kv.line});
        t.resolution_schedule.push_back(std::move(st));
      }
    } else {
      throw Error(ErrorCode::Config, "line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
    }
  }
  if (!saw_dims) cfg.codec.arch.dims = static_cast<int>(cfg.extents.size());
  cfg.codec = cfg.codec.resolved();
  if (saw_dims && !saw_extents && cfg.extents.size() != static_cast<std::size_t>(cfg.codec.arch.dims))
    cfg.extents = Shape(static_cast<std::size_t>(cfg.codec.arch.dims), std::size_t{8} << cfg.codec.arch.levels);
  cfg.codec.validate();
  cfg.train.validate();
  if (cfg.extents.size() != static_cast<std::size_t>(cfg.codec.arch.dims))
    throw Error(ErrorCode::Config, "extents rank does not match dims");
  if (cfg.log_every < 1) throw Error(ErrorCode::Config, "log_every must be positive");
  return cfg;
}

std::unique_ptr<SignalSource> make_source(const ExperimentConfig& cfg) {
  std::unique_ptr<SignalSource> src;
  if (cfg.data == "sines")
    src = std::make_unique<SyntheticSines>();
  else
    src = std::make_unique<TensorCrops>(load_lvat(cfg.data));
  if (src->channels() != static_cast<std::size_t>(cfg.codec.arch.channels))
    throw Error(ErrorCode::Config, "training data has " + std::to_string(src->channels()) +
                                       " channels, config expects " + std::to_string(cfg.codec.arch.channels));
  return src;
}

Shape extents_at(const ExperimentConfig& cfg, std::int64_t step) {
  Shape e = cfg.extents;
  for (const auto& st : cfg.train.resolution_schedule)
    if (st.step <= step) e = st.extents;
  return e;
}

std::vector<Tensor> draw_batch(SignalSource& source, const TrainConfig& cfg, const Shape& extents,
                               std::int64_t step) {
  Rng rng(step_seed(cfg.seed, step, 2));
  std::vector<Tensor> batch;
  for (int i = 0; i < cfg.batch_size; ++i) batch.push_back(source.sample(rng, extents));
  return batch;
}

TrainResult run_training(const ExperimentConfig& cfg, SignalSource& source,
                         const std::function<void(const StepStats&)>& on_step) {
  TrainResult result;
  result.state = init_train_state(init_model(cfg.codec, cfg.train.seed));
  for (std::int64_t s = 0; s < cfg.train.total_steps; ++s) {
    const auto batch = draw_batch(source, cfg.train, extents_at(cfg, s), s);
    StepStats st = train_step(result.state, batch, cfg.train);
    result.history.push_back(st);
    if (on_step) on_step(st);
  }
  const std::size_t n = result.history.size();
  const std::size_t e = std::min<std::size_t>(static_cast<std::size_t>(cfg.train.epoch_steps), n);
  for (std::size_t i = 0; i < e; ++i) {
    result.initial_epoch_mse += result.history[i].mse / static_cast<double>(e);
    result.final_epoch_mse += result.history[n - e + i].mse / static_cast<double>(e);
  }
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_checkpoint(const TrainState& s) {
  ByteWriter w;
  w.bytes(kCheckpointMagic);
  w.u8(kCheckpointVersion);
  w.u64(static_cast<std::uint64_t>(s.step));
  w.u8(static_cast<std::uint8_t>(s.phase));
  w.u64(static_cast<std::uint64_t>(s.optim.t));
  const auto model = encode_model(s.params);
  w.u32(static_cast<std::uint32_t>(model.size()));
  w.bytes(model);
  w.u64(s.params.weights.scalar_count());
  for (std::size_t i = 0; i < s.params.weights.size(); ++i)
    for (double v : s.params.weights.value(i).data()) w.f64(v);
  for (const auto* moments : {&s.optim.m, &s.optim.v})
    for (const Tensor& t : *moments)
      for (double v : t.data()) w.f64(v);
  return w.take();
}

TrainState decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kCheckpointMagic)) throw DecodeError(0, "not an LVCK checkpoint");
  if (const auto v = r.u8(); v != kCheckpointVersion)
    throw DecodeError(4, "unsupported checkpoint version " + std::to_string(v));
  TrainState s;
  s.step = static_cast<std::int64_t>(r.u64());
  const std::size_t phase_at = r.offset();
  const std::uint8_t phase = r.u8();
  if (phase > 1) throw DecodeError(phase_at, "unknown training phase");
  s.phase = static_cast<Phase>(phase);
  const std::uint64_t t = r.u64();
  const std::uint32_t model_len = r.u32();
  s = [&] {
    TrainState fresh = init_train_state(decode_model(r.bytes(model_len)));
    fresh.step = s.step;
    fresh.phase = s.phase;
    fresh.optim.t = static_cast<std::int64_t>(t);
    return fresh;
  }();
  const std::size_t count_at = r.offset();
  if (r.u64() != s.params.weights.scalar_count()) throw DecodeError(count_at, "checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < s.params.weights.size(); ++i)
    for (double& v : s.params.weights.value(i).data()) v = r.f64();
  for (auto* moments : {&s.optim.m, &s.optim.v})
    for (Tensor& m : *moments)
      for (double& v : m.data()) v = r.f64();
  if (r.remaining() != 0) throw DecodeError(r.offset(), "trailing bytes after checkpoint");
  return s;
}

void save_checkpoint(const std::string& path, const TrainState& s) { write_file_atomic(path, encode_checkpoint(s)); }

ModelParams load_model(const std::string& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, kCheckpointMagic))
    return decode_checkpoint(bytes).params;
  return decode_model(bytes);
}

}  // namespace lva
