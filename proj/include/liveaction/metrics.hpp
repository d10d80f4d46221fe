// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "liveaction/codec.hpp"
#include "liveaction/config.hpp"
#include "liveaction/neural.hpp"
#include "liveaction/tensor.hpp"

namespace lva {

/// 10 log10(peak^2 / MSE); identical inputs give +infinity.
double psnr(const Tensor& x, const Tensor& x_hat, double peak = 1.0);
double mse(const Tensor& x, const Tensor& x_hat);

/// C * prod(T) / (C_z * prod(t)).
double dimensionality_reduction(const Shape& signal_shape, const Shape& latent_shape);
/// Source bytes at `bits_per_sample` over file bytes.
double compression_ratio(const Shape& signal_shape, int bits_per_sample, std::size_t file_bytes);

struct RdPoint {
  double rate = 0.0;     // bits per source sample
  double quality = 0.0;  // dB
};

/// Bjontegaard delta rate in percent: least-squares cubic fits of ln(rate)
/// against quality, averaged over the shared quality interval. Negative
/// values mean curve_a needs fewer bits.
double bd_rate(const std::vector<RdPoint>& curve_a, const std::vector<RdPoint>& curve_b);

struct MacEntry {
  std::string layer;
  double per_position = 0.0;  // MACs per latent-grid position
  double total = 0.0;         // over all positions (or once, for global terms)
};

struct MacReport {
  std::vector<MacEntry> breakdown;
  double macs_per_position = 0.0;
  double macs_total = 0.0;
  std::size_t positions = 0;

  /// FLOPs counted as two per MAC.
  double flops_total() const { return 2.0 * macs_total; }
};

/// Multiply-accumulates of a 1x1 projection per position.
double pointwise_macs(std::size_t c_in, std::size_t c_out);
/// Multiply-accumulates of a grouped convolution per position.
double grouped_conv_macs(std::size_t c_in, std::size_t c_out, std::size_t groups, std::size_t kernel, int dims);

/// Learned layers of the analysis and synthesis transforms for an input of
/// the given spatio-temporal extents. The wavelet, compander and
/// normalization steps are elementwise and not counted.
MacReport mac_count(const ArchConfig& cfg, const Shape& input_extents);
/// Encoder only (analysis transform and latent projection).
MacReport encoder_mac_count(const ArchConfig& cfg, const Shape& input_extents);

/// MACs per second of one dense c_in -> c_out projection applied to every
/// region x region x region block of a width x height video at `fps`.
double projection_macs_per_second(std::size_t width, std::size_t height, double fps, std::size_t region,
                                  std::size_t c_in, std::size_t c_out);

struct ThroughputReport {
  std::string name;
  std::size_t samples_per_run = 0;
  int repetitions = 0;
  int warmup = 0;
  int threads = 1;
  std::string precision;
  std::string config_digest;
  double median_samples_per_second = 0.0;
  double iqr_samples_per_second = 0.0;
  std::vector<double> runs;  // samples per second, in run order

  std::string to_json() const;
};

/// Times `workload` (which must process `samples_per_run` source samples,
/// entropy coding included) after `warmup` untimed calls.
ThroughputReport throughput_bench(const std::string& name, const std::function<void()>& workload,
                                  std::size_t samples_per_run, int repetitions, int warmup = 1);

/// Pooled entropy-coded rate of several latent codes: each latent channel
/// is concatenated across codes and coded as one stream, so the frequency
/// tables are amortized over the whole set.
struct PooledRate {
  std::size_t symbols = 0;
  std::size_t samples = 0;
  std::size_t coded_bytes = 0;  // tables plus payload
  double bits_per_symbol() const { return 8.0 * static_cast<double>(coded_bytes) / static_cast<double>(symbols); }
  double bits_per_sample() const { return 8.0 * static_cast<double>(coded_bytes) / static_cast<double>(samples); }
};
PooledRate pooled_rate(const std::vector<LatentCode>& codes);

struct SweepModel {
  std::string name;
  ModelParams params;
};

struct SweepResult {
  std::string model;
  RdPoint point;  // rate in bits per source sample
  double bits_per_symbol = 0.0;
  double psnr = 0.0;
  double mean_file_bits_per_symbol = 0.0;
};

/// Encodes and decodes every test signal with every model.
std::vector<SweepResult> rd_sweep(const std::vector<SweepModel>& models, const std::vector<Tensor>& test_set,
                                  Precision precision = Precision::Double);
/// Long format "model,metric,value", one row per model and metric.
std::string rd_sweep_csv(const std::vector<SweepResult>& results);

}  // namespace lva
