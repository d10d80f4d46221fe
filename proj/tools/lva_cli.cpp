// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library through the C API only.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "liveaction/liveaction.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(lva_status s) {
  switch (s) {
    case LVA_ERR_CONFIG:
    case LVA_ERR_NOT_FOUND:
    case LVA_ERR_INVALID_ARGUMENT:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

void check(lva_status s, const std::string& context) {
  if (s != LVA_OK) throw Failure{exit_code_for(s), context + ": " + lva_last_error()};
}

struct TensorDeleter {
  void operator()(lva_tensor* t) const { lva_tensor_free(t); }
};
struct ModelDeleter {
  void operator()(lva_model* m) const { lva_model_free(m); }
};
struct BufferDeleter {
  void operator()(lva_buffer* b) const { lva_buffer_free(b); }
};
using TensorPtr = std::unique_ptr<lva_tensor, TensorDeleter>;
using ModelPtr = std::unique_ptr<lva_model, ModelDeleter>;
using BufferPtr = std::unique_ptr<lva_buffer, BufferDeleter>;

std::string read_text(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitUsage, std::string(what) + " not found: " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_bytes(const std::string& path, const char* what) {
  const std::string s = read_text(path, what);
  return {s.begin(), s.end()};
}

// Temporary sibling plus rename, so failures never leave partial files.
void write_atomic(const std::string& path, const void* data, std::size_t size) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Failure{kExitRuntime, "cannot write " + path};
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Failure{kExitRuntime, "write failed for " + path};
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Failure{kExitRuntime, "cannot move output into place: " + path};
  }
}

void write_atomic(const std::string& path, const std::string& text) { write_atomic(path, text.data(), text.size()); }

ModelPtr load_model(const std::string& path) {
  lva_model* m = nullptr;
  const lva_status s = lva_model_load(path.c_str(), &m);
  if (s == LVA_ERR_NOT_FOUND) throw Failure{kExitUsage, "model not found: " + path};
  check(s, "cannot load model " + path);
  return ModelPtr(m);
}

TensorPtr load_tensor(const std::string& path) {
  lva_tensor* t = nullptr;
  const lva_status s = lva_tensor_load(path.c_str(), &t);
  if (s == LVA_ERR_NOT_FOUND) throw Failure{kExitUsage, "input not found: " + path};
  check(s, "cannot read tensor " + path);
  return TensorPtr(t);
}

lva_precision parse_precision(const std::string& p) { return p == "f32" ? LVA_F32 : LVA_F64; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Common {
  int threads = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string precision = "f32";
};

void add_common(CLI::App* app, Common& c, bool with_precision = true) {
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "Random seed")->each([&c](const std::string&) { c.seed_set = true; });
  if (with_precision)
    app->add_option("--precision", c.precision, "Inference precision")
        ->check(CLI::IsMember({"f32", "f64"}))
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned wavelet codec for 1-D to 3-D multichannel signals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lva_version());

  Common common;
  std::string input, output, model, config, workload = "encode", dtype = "f64";
  std::vector<std::string> inputs, models;
  double lambda = 0.0, dr = 64.0;
  int bit_depth = 8, repetitions = 5, dims = 2, channels = 3;
  bool channels_as_dim = false;

  auto* enc = app.add_subcommand("encode", "Encode an LVAT tensor into an LVAC bitstream");
  enc->add_option("--input", input, "Input tensor (.lvat)")->required();
  enc->add_option("--model", model, "Model or checkpoint")->required();
  enc->add_option("--output", output, "Output bitstream (.lvac)")->required();
  enc->add_option("--bit-depth", bit_depth, "Source bit depth used for the compression ratio")->capture_default_str();
  add_common(enc, common);

  auto* dec = app.add_subcommand("decode", "Decode an LVAC bitstream into an LVAT tensor");
  dec->add_option("--input", input, "Input bitstream (.lvac)")->required();
  dec->add_option("--model", model, "Model or checkpoint")->required();
  dec->add_option("--output", output, "Output tensor (.lvat)")->required();
  dec->add_option("--dtype", dtype, "Stored element type")->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();
  add_common(dec, common);

  auto* train = app.add_subcommand("train", "Train a codec from a key=value config");
  train->add_option("--config", config, "Training config")->required();
  train->add_option("--output", output, "Checkpoint path (.lvck)")->capture_default_str();
  train->add_option("--model", model, "Also write the trained model (.lvam)");
  auto* lambda_opt = train->add_option("--lambda", lambda, "Override the rate weight");
  add_common(train, common, false);

  auto* eval = app.add_subcommand("eval", "Rate and PSNR of one or more models on test tensors");
  eval->add_option("--input", inputs, "Test tensors (.lvat)")->required();
  eval->add_option("--model", models, "Models to compare")->required();
  eval->add_option("--output", output, "CSV report (model,metric,value)");
  add_common(eval, common);

  auto* bench = app.add_subcommand("bench", "Throughput benchmark, JSON report");
  bench->add_option("--input", input, "Workload tensor (.lvat)")->required();
  bench->add_option("--model", model, "Model or checkpoint")->required();
  bench->add_option("--workload", workload, "encode, decode or roundtrip")
      ->check(CLI::IsMember({"encode", "decode", "roundtrip"}))
      ->capture_default_str();
  bench->add_option("--repetitions", repetitions, "Timed repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--output", output, "JSON report path");
  add_common(bench, common);

  auto* suggest = app.add_subcommand("suggest", "Suggest a codec config for a signal modality");
  suggest->add_option("--dims", dims, "Spatio-temporal dimensions")->capture_default_str();
  suggest->add_option("--channels", channels, "Channels")->capture_default_str();
  suggest->add_flag("--channels-as-dimension", channels_as_dim, "Treat channels as an extra axis");
  suggest->add_option("--dr", dr, "Target dimensionality reduction")->capture_default_str();
  suggest->add_option("--output", output, "Write the config here");
  add_common(suggest, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    check(lva_set_threads(common.threads), "threads");
    const lva_precision prec = parse_precision(common.precision);

    if (*enc) {
      ModelPtr m = load_model(model);
      TensorPtr x = load_tensor(input);
      lva_buffer* raw = nullptr;
      check(lva_encode(m.get(), x.get(), prec, &raw), "encode failed");
      BufferPtr b(raw);
      lva_bitstream_info info{};
      check(lva_bitstream_inspect(lva_buffer_data(b.get()), lva_buffer_size(b.get()), &info), "inspect failed");
      write_atomic(output, lva_buffer_data(b.get()), lva_buffer_size(b.get()));
      const double cr = static_cast<double>(info.samples) * bit_depth / 8.0 / static_cast<double>(info.file_bytes);
      std::cout << "encode samples=" << info.samples << " symbols=" << info.symbols << " bytes=" << info.file_bytes
                << " payload_bytes=" << info.payload_bytes << " bits_per_symbol=" << fmt(info.bits_per_symbol)
                << " bpp=" << fmt(info.bits_per_sample) << " cr=" << fmt(cr)
                << " dr=" << fmt(info.dimensionality_reduction) << "\n";
    } else if (*dec) {
      ModelPtr m = load_model(model);
      const auto bytes = read_bytes(input, "input");
      lva_tensor* raw = nullptr;
      check(lva_decode(m.get(), bytes.data(), bytes.size(), prec, &raw), "decode failed");
      TensorPtr y(raw);
      check(lva_tensor_save(y.get(), output.c_str(), dtype == "f32" ? 0 : 1), "cannot write " + output);
      std::cout << "decode shape=";
      for (std::size_t i = 0; i < lva_tensor_rank(y.get()); ++i)
        std::cout << (i ? "x" : "") << lva_tensor_shape(y.get())[i];
      std::cout << "\n";
    } else if (*train) {
      const std::string text = read_text(config, "config");
      if (output.empty()) output = "checkpoint.lvck";
      auto log = [](const lva_train_step* s, void*) {
        std::printf("step=%lld phase=%s loss=%.6f mse=%.6e var=%.6f lr=%.6e\n", static_cast<long long>(s->step),
                    s->phase ? "hard" : "soft", s->loss, s->mse, s->variance, s->learning_rate);
        std::fflush(stdout);
      };
      lva_model* raw = nullptr;
      check(lva_train(text.c_str(), common.seed_set, common.seed, lambda_opt->count() > 0, lambda, output.c_str(), log,
                      nullptr, &raw),
            "training failed");
      ModelPtr m(raw);
      if (!model.empty()) check(lva_model_save(m.get(), model.c_str()), "cannot write " + model);
      std::cout << "checkpoint=" << output << " digest=" << lva_model_digest(m.get()) << "\n";
    } else if (*eval) {
      std::vector<TensorPtr> owned;
      std::vector<const lva_tensor*> set;
      for (const auto& p : inputs) {
        owned.push_back(load_tensor(p));
        set.push_back(owned.back().get());
      }
      std::ostringstream csv;
      csv << "model,metric,value\n";
      for (const auto& path : models) {
        ModelPtr m = load_model(path);
        lva_eval_result r{};
        check(lva_eval(m.get(), set.data(), set.size(), prec, &r), "evaluation failed for " + path);
        csv << path << ",bits_per_sample," << fmt(r.bits_per_sample) << "\n"
            << path << ",bits_per_symbol," << fmt(r.bits_per_symbol) << "\n"
            << path << ",file_bits_per_symbol," << fmt(r.mean_file_bits_per_symbol) << "\n"
            << path << ",psnr_db," << fmt(r.psnr) << "\n";
      }
      if (!output.empty()) write_atomic(output, csv.str());
      std::cout << csv.str();
    } else if (*bench) {
      ModelPtr m = load_model(model);
      TensorPtr x = load_tensor(input);
      lva_buffer* raw = nullptr;
      check(lva_bench(m.get(), x.get(), workload.c_str(), prec, repetitions, &raw), "benchmark failed");
      BufferPtr b(raw);
      const std::string json(reinterpret_cast<const char*>(lva_buffer_data(b.get())), lva_buffer_size(b.get()));
      if (!output.empty()) write_atomic(output, json + "\n");
      std::cout << json << "\n";
    } else if (*suggest) {
      lva_buffer* raw = nullptr;
      check(lva_suggest(dims, channels, channels_as_dim, dr, &raw), "no configuration");
      BufferPtr b(raw);
      const std::string text(reinterpret_cast<const char*>(lva_buffer_data(b.get())), lva_buffer_size(b.get()));
      if (!output.empty()) write_atomic(output, text);
      std::cout << text;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
