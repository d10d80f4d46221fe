// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "liveaction/entropy.hpp"
#include "liveaction/parallel.hpp"

namespace lva {

double mse(const Tensor& x, const Tensor& x_hat) {
  if (x.shape() != x_hat.shape())
    throw Error(ErrorCode::Shape, "cannot compare " + shape_string(x.shape()) + " with " + shape_string(x_hat.shape()));
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - x_hat[i]) * (x[i] - x_hat[i]);
  return acc / static_cast<double>(x.size());
}

double psnr(const Tensor& x, const Tensor& x_hat, double peak) {
  if (!(peak > 0.0)) throw Error(ErrorCode::InvalidArgument, "psnr peak must be positive");
  const double e = mse(x, x_hat);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

double dimensionality_reduction(const Shape& signal_shape, const Shape& latent_shape) {
  return static_cast<double>(shape_size(signal_shape)) / static_cast<double>(shape_size(latent_shape));
}

double compression_ratio(const Shape& signal_shape, int bits_per_sample, std::size_t file_bytes) {
  return static_cast<double>(shape_size(signal_shape)) * bits_per_sample / 8.0 / static_cast<double>(file_bytes);
}

namespace {

// Least-squares cubic ln(rate) = c0 + c1 q + c2 q^2 + c3 q^3; returns the
// integral over [lo, hi].
double integrate_fit(const std::vector<RdPoint>& curve, double lo, double hi) {
  const Eigen::Index n = static_cast<Eigen::Index>(curve.size());
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double q = curve[i].quality;
    a(i, 0) = 1.0;
    a(i, 1) = q;
    a(i, 2) = q * q;
    a(i, 3) = q * q * q;
    b(i) = std::log(curve[i].rate);
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  auto primitive = [&](double q) {
    return c(0) * q + c(1) * q * q / 2.0 + c(2) * q * q * q / 3.0 + c(3) * q * q * q * q / 4.0;
  };
  return primitive(hi) - primitive(lo);
}

void check_curve(const std::vector<RdPoint>& c, const char* name) {
  if (c.size() < 4) throw Error(ErrorCode::InvalidArgument, std::string("bd_rate: ") + name + " needs at least 4 points");
  for (const auto& p : c)
    if (!(p.rate > 0.0) || !std::isfinite(p.quality))
      throw Error(ErrorCode::InvalidArgument, std::string("bd_rate: ") + name + " has a non-positive rate");
}

}  // namespace

double bd_rate(const std::vector<RdPoint>& curve_a, const std::vector<RdPoint>& curve_b) {
  check_curve(curve_a, "curve_a");
  check_curve(curve_b, "curve_b");
  auto range = [](const std::vector<RdPoint>& c) {
    auto [lo, hi] = std::minmax_element(c.begin(), c.end(),
                                        [](const RdPoint& x, const RdPoint& y) { return x.quality < y.quality; });
    return std::pair{lo->quality, hi->quality};
  };
  const auto [a_lo, a_hi] = range(curve_a);
  const auto [b_lo, b_hi] = range(curve_b);
  const double lo = std::max(a_lo, b_lo), hi = std::min(a_hi, b_hi);
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "bd_rate: curves share no quality interval");
  const double avg = (integrate_fit(curve_a, lo, hi) - integrate_fit(curve_b, lo, hi)) / (hi - lo);
  return (std::exp(avg) - 1.0) * 100.0;
}

double pointwise_macs(std::size_t c_in, std::size_t c_out) {
  return static_cast<double>(c_in) * static_cast<double>(c_out);
}

double grouped_conv_macs(std::size_t c_in, std::size_t c_out, std::size_t groups, std::size_t kernel, int dims) {
  if (groups == 0 || c_in % groups || c_out % groups)
    throw Error(ErrorCode::Config, "groups must divide both channel counts");
  return std::pow(static_cast<double>(kernel), dims) * static_cast<double>(c_in) * static_cast<double>(c_out) /
         static_cast<double>(groups);
}

namespace {

std::size_t latent_positions(const ArchConfig& a, const Shape& extents) {
  if (extents.size() != static_cast<std::size_t>(a.dims))
    throw Error(ErrorCode::Shape, "mac_count: extents rank does not match dims");
  std::size_t n = 1;
  for (auto e : extents) n *= std::max<std::size_t>(1, e >> a.levels);
  return n;
}

void push(MacReport& r, std::string layer, double per_position) {
  r.breakdown.push_back({std::move(layer), per_position, per_position * static_cast<double>(r.positions)});
}

void push_global(MacReport& r, std::string layer, double once) {
  r.breakdown.push_back({std::move(layer), once / static_cast<double>(r.positions), once});
}

void finish(MacReport& r) {
  r.macs_total = 0.0;
  for (const auto& e : r.breakdown) r.macs_total += e.total;
  r.macs_per_position = r.macs_total / static_cast<double>(r.positions);
}

void add_encoder(MacReport& r, const ArchConfig& a) {
  const std::size_t h = a.hidden();
  const std::size_t se = h / static_cast<std::size_t>(a.se_reduction);
  for (int b = 0; b < a.enc_depth; ++b) {
    const std::string p = "enc." + std::to_string(b) + ".";
    push(r, p + "conv1", grouped_conv_macs(h, h, a.groups1, a.kernel, a.dims));
    push(r, p + "conv2", grouped_conv_macs(h, h, a.groups2, a.kernel, a.dims));
    push_global(r, p + "se", 2.0 * static_cast<double>(h * se));
  }
  push(r, "enc.proj", pointwise_macs(h, a.latent_channels));
}

}  // namespace

MacReport encoder_mac_count(const ArchConfig& cfg, const Shape& input_extents) {
  const ArchConfig a = cfg.resolved();
  a.validate();
  MacReport r;
  r.positions = latent_positions(a, input_extents);
  add_encoder(r, a);
  finish(r);
  return r;
}

MacReport mac_count(const ArchConfig& cfg, const Shape& input_extents) {
  const ArchConfig a = cfg.resolved();
  a.validate();
  MacReport r;
  r.positions = latent_positions(a, input_extents);
  add_encoder(r, a);
  const std::size_t h = a.hidden();
  const std::size_t ffn = h * static_cast<std::size_t>(a.ffn_ratio);
  push(r, "dec.expand", pointwise_macs(a.latent_channels, h));
  for (int b = 0; b < a.dec_depth; ++b) {
    const std::string p = "dec." + std::to_string(b) + ".";
    push(r, p + "attn.qkv", 3.0 * pointwise_macs(h, h));
    // Per head: accumulate k v^T, then apply it to q (d x d each).
    const double d = static_cast<double>(h) / a.heads;
    push(r, p + "attn.linear", 2.0 * d * d * a.heads + 2.0 * static_cast<double>(h));
    push(r, p + "attn.out", pointwise_macs(h, h));
    push(r, p + "ffn", pointwise_macs(h, ffn) + pointwise_macs(ffn, h));
  }
  push(r, "dec.proj", pointwise_macs(h, h));
  finish(r);
  return r;
}

double projection_macs_per_second(std::size_t width, std::size_t height, double fps, std::size_t region,
                                  std::size_t c_in, std::size_t c_out) {
  const double regions_per_second = static_cast<double>(width) / region * static_cast<double>(height) / region *
                                    fps / static_cast<double>(region);
  return regions_per_second * pointwise_macs(c_in, c_out);
}

std::string ThroughputReport::to_json() const {
  nlohmann::json j = {{"name", name},
                      {"samples_per_run", samples_per_run},
                      {"repetitions", repetitions},
                      {"warmup", warmup},
                      {"threads", threads},
                      {"precision", precision},
                      {"config_digest", config_digest},
                      {"median_samples_per_second", median_samples_per_second},
                      {"iqr_samples_per_second", iqr_samples_per_second},
                      {"runs", runs}};
  return j.dump(2);
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i];
}

}  // namespace

ThroughputReport throughput_bench(const std::string& name, const std::function<void()>& workload,
                                  std::size_t samples_per_run, int repetitions, int warmup) {
  if (repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be positive");
  ThroughputReport r;
  r.name = name;
  r.samples_per_run = samples_per_run;
  r.repetitions = repetitions;
  r.warmup = warmup;
  r.threads = num_threads();
  for (int i = 0; i < warmup; ++i) workload();
  for (int i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    workload();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.runs.push_back(static_cast<double>(samples_per_run) / std::max(secs, 1e-9));
  }
  r.median_samples_per_second = quantile(r.runs, 0.5);
  r.iqr_samples_per_second = quantile(r.runs, 0.75) - quantile(r.runs, 0.25);
  return r;
}

PooledRate pooled_rate(const std::vector<LatentCode>& codes) {
  if (codes.empty()) throw Error(ErrorCode::InvalidArgument, "pooled_rate: no latent codes");
  const std::size_t channels = codes[0].latent_shape.at(0);
  std::vector<std::vector<std::int8_t>> per(channels);
  PooledRate r;
  for (const auto& code : codes) {
    if (code.latent_shape.at(0) != channels) throw Error(ErrorCode::Shape, "pooled_rate: latent channel counts differ");
    const std::size_t plane = code.symbols.size() / channels;
    for (std::size_t c = 0; c < channels; ++c)
      per[c].insert(per[c].end(), code.symbols.begin() + c * plane, code.symbols.begin() + (c + 1) * plane);
    r.symbols += code.symbols.size();
    r.samples += shape_size(code.original_shape);
  }
  // Channels must be equally long for entropy_encode; codes of mixed
  // extents are coded channel by channel instead.
  for (const auto& stream : per) {
    const auto coded = entropy_encode(stream, 1);
    r.coded_bytes += coded.tables.size() + coded.payload.size();
  }
  return r;
}

std::vector<SweepResult> rd_sweep(const std::vector<SweepModel>& models, const std::vector<Tensor>& test_set,
                                  Precision precision) {
  if (test_set.empty()) throw Error(ErrorCode::InvalidArgument, "rd_sweep: empty test set");
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "rd_sweep: no models");
  std::vector<SweepResult> out;
  for (const auto& m : models) {
    std::vector<LatentCode> codes;
    double err = 0.0, file_bps = 0.0;
    std::size_t elements = 0;
    for (const Tensor& x : test_set) {
      const auto bytes = encode_padded(x, m.params, precision);
      const auto parsed = read_container(bytes);
      check_container_params(parsed.info, m.params);
      const Tensor y = synthesize(parsed.code, m.params, precision);
      err += mse(x, y) * static_cast<double>(x.size());
      elements += x.size();
      file_bps += 8.0 * static_cast<double>(parsed.info.payload_bytes) / static_cast<double>(parsed.info.symbol_count());
      codes.push_back(parsed.code);
    }
    const PooledRate rate = pooled_rate(codes);
    SweepResult r;
    r.model = m.name;
    r.bits_per_symbol = rate.bits_per_symbol();
    r.point.rate = rate.bits_per_sample();
    const double e = err / static_cast<double>(elements);
    r.psnr = e == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / e);
    r.point.quality = r.psnr;
    r.mean_file_bits_per_symbol = file_bps / static_cast<double>(test_set.size());
    out.push_back(r);
  }
  return out;
}

std::string rd_sweep_csv(const std::vector<SweepResult>& results) {
  std::ostringstream os;
  os.precision(10);
  os << "model,metric,value\n";
  for (const auto& r : results) {
    os << r.model << ",bits_per_sample," << r.point.rate << "\n";
    os << r.model << ",bits_per_symbol," << r.bits_per_symbol << "\n";
    os << r.model << ",file_bits_per_symbol," << r.mean_file_bits_per_symbol << "\n";
    os << r.model << ",psnr_db," << r.psnr << "\n";
  }
  return os.str();
}

}  // namespace lva
