// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "liveaction/neural.hpp"
#include "liveaction/random.hpp"
#include "liveaction/tensor.hpp"

namespace lva {

struct ResolutionStage {
  std::int64_t step = 0;
  Shape extents;  // spatio-temporal extents only
};

struct TrainConfig {
  double lambda = 0.03;
  std::int64_t total_steps = 1000;
  double hard_switch_fraction = 0.7;
  int batch_size = 8;
  double learning_rate = 1e-3;
  bool cosine_decay = true;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  /// Steps averaged for the initial/final epoch MSE figures.
  int epoch_steps = 20;
  std::vector<ResolutionStage> resolution_schedule;

  void validate() const;
};

enum class Phase : std::uint8_t { Soft = 0, HardFrozenEncoder = 1 };

const char* phase_name(Phase p);

/// First step of the hard-quantization phase: ceil(fraction * total_steps).
std::int64_t hard_switch_step(const TrainConfig& cfg);
Phase schedule_phase(std::int64_t step, const TrainConfig& cfg);

struct RdLossTerms {
  double loss = 0.0;
  double sse = 0.0;       // squared L2 norm of the error
  double variance = 0.0;  // population variance of the mapped latents
};

/// log10(max(||x - x_hat||^2, 1e-12)) + lambda * log2(max(Var[latents], 1e-9)).
RdLossTerms rd_loss_terms(const Tensor& x, const Tensor& x_hat, const Tensor& latents_phi, double lambda);
double rd_loss(const Tensor& x, const Tensor& x_hat, const Tensor& latents_phi, double lambda);

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t t = 0;  // number of updates applied
};

struct TrainState {
  std::int64_t step = 0;
  ModelParams params;
  AdamState optim;
  Phase phase = Phase::Soft;
};

TrainState init_train_state(ModelParams params);

struct StepStats {
  std::int64_t step = 0;
  Phase phase = Phase::Soft;
  double loss = 0.0;
  double sse = 0.0;
  double mse = 0.0;  // mean over elements and samples, for comparison only
  double variance = 0.0;
  double learning_rate = 0.0;
};

/// One optimizer update on `batch`. In the soft phase, quantization is
/// simulated by uniform noise drawn from an RNG seeded by (cfg.seed, step).
/// In the hard phase the encoder side (analysis transform, Laplacian scales)
/// is frozen: latents are rounded and only the synthesis transform updates.
StepStats train_step(TrainState& state, const std::vector<Tensor>& batch, const TrainConfig& cfg);

/// Phi(G_A(C(WPT(x)))) before quantization, in double precision.
Tensor encode_latents(const ModelParams& m, const Tensor& x);
/// Full codec in double precision with hard rounding.
Tensor reconstruct_hard(const ModelParams& m, const Tensor& x);

// ---------------------------------------------------------------------------
// Training data

class SignalSource {
 public:
  virtual ~SignalSource() = default;
  /// One sample with shape (channels, extents...).
  virtual Tensor sample(Rng& rng, const Shape& extents) = 0;
  virtual std::size_t channels() const = 0;
};

/// C=1 sums of three sinusoids with 1..20 cycles per window, amplitudes in
/// [0.05, 0.15] around 0.5, so samples stay inside [0, 1].
class SyntheticSines final : public SignalSource {
 public:
  Tensor sample(Rng& rng, const Shape& extents) override;
  std::size_t channels() const override { return 1; }
};

/// Random crops from one large tensor.
class TensorCrops final : public SignalSource {
 public:
  explicit TensorCrops(Tensor source);
  Tensor sample(Rng& rng, const Shape& extents) override;
  std::size_t channels() const override { return source_.channels(); }

 private:
  Tensor source_;
};

struct ExperimentConfig {
  CodecConfig codec;
  TrainConfig train;
  std::string data = "sines";  // "sines" or a path to an LVAT tensor
  Shape extents{512};
  int log_every = 1;
};

/// Parses the key=value training config (codec keys, trainer keys, data
/// keys). Unknown keys are errors reported with their line number.
ExperimentConfig parse_experiment(std::string_view text);

struct TrainResult {
  TrainState state;
  std::vector<StepStats> history;
  double initial_epoch_mse = 0.0;
  double final_epoch_mse = 0.0;
};

std::unique_ptr<SignalSource> make_source(const ExperimentConfig& cfg);

/// Runs train_step for cfg.train.total_steps steps from a fresh model
/// initialized with cfg.train.seed. `on_step` sees every step.
TrainResult run_training(const ExperimentConfig& cfg, SignalSource& source,
                         const std::function<void(const StepStats&)>& on_step = {});

/// Deterministic batch for step `step` (used by run_training).
std::vector<Tensor> draw_batch(SignalSource& source, const TrainConfig& cfg, const Shape& extents,
                               std::int64_t step);
Shape extents_at(const ExperimentConfig& cfg, std::int64_t step);

// ---------------------------------------------------------------------------
// Checkpoints: "LVCK" | u8 version | u64 step | u8 phase | u64 adam updates |
// u32 model length | LVAM model | u64 n | f64 x n params | f64 x n first
// moments | f64 x n second moments.

std::vector<std::uint8_t> encode_checkpoint(const TrainState& s);
TrainState decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::string& path, const TrainState& s);

/// Loads model parameters from an LVAM model file or an LVCK checkpoint
/// (full precision weights).
ModelParams load_model(const std::string& path);

}  // namespace lva
