// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/liveaction.h"

#include <new>
#include <string>

#include "liveaction/bytes.hpp"
#include "liveaction/codec.hpp"
#include "liveaction/metrics.hpp"
#include "liveaction/parallel.hpp"
#include "liveaction/train.hpp"

struct lva_tensor {
  lva::Tensor t;
};
struct lva_model {
  lva::ModelParams m;
  std::string digest;
};
struct lva_buffer {
  std::vector<std::uint8_t> bytes;
};

namespace {

thread_local std::string g_error;
thread_local std::int64_t g_offset = -1;

lva_status status_of(lva::ErrorCode c) {
  switch (c) {
    case lva::ErrorCode::Shape: return LVA_ERR_SHAPE;
    case lva::ErrorCode::Config: return LVA_ERR_CONFIG;
    case lva::ErrorCode::Domain: return LVA_ERR_DOMAIN;
    case lva::ErrorCode::Decode: return LVA_ERR_DECODE;
    case lva::ErrorCode::ParamMismatch: return LVA_ERR_PARAM_MISMATCH;
    case lva::ErrorCode::Io: return LVA_ERR_IO;
    case lva::ErrorCode::NotFound: return LVA_ERR_NOT_FOUND;
    case lva::ErrorCode::InvalidArgument: return LVA_ERR_INVALID_ARGUMENT;
  }
  return LVA_ERR_INTERNAL;
}

template <typename F>
lva_status guarded(F&& f) {
  g_error.clear();
  g_offset = -1;
  try {
    f();
    return LVA_OK;
  } catch (const lva::DecodeError& e) {
    g_error = e.what();
    g_offset = static_cast<std::int64_t>(e.offset());
    return LVA_ERR_DECODE;
  } catch (const lva::Error& e) {
    g_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return LVA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return LVA_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw lva::Error(lva::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

lva::Precision precision_of(lva_precision p) {
  if (p == LVA_F32) return lva::Precision::Single;
  if (p == LVA_F64) return lva::Precision::Double;
  throw lva::Error(lva::ErrorCode::InvalidArgument, "unknown precision");
}

lva_model* wrap(lva::ModelParams m) {
  auto* out = new lva_model{std::move(m), {}};
  out->digest = out->m.config.digest();
  return out;
}

}  // namespace

extern "C" {

const char* lva_last_error(void) { return g_error.c_str(); }
int64_t lva_last_error_offset(void) { return g_offset; }

const char* lva_status_name(lva_status s) {
  switch (s) {
    case LVA_OK: return "ok";
    case LVA_ERR_SHAPE: return "shape error";
    case LVA_ERR_CONFIG: return "config error";
    case LVA_ERR_DOMAIN: return "domain error";
    case LVA_ERR_DECODE: return "decode error";
    case LVA_ERR_PARAM_MISMATCH: return "parameter mismatch";
    case LVA_ERR_IO: return "i/o error";
    case LVA_ERR_NOT_FOUND: return "not found";
    case LVA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LVA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lva_version(void) { return "0.1.0"; }

lva_status lva_set_threads(int n) {
  return guarded([&] {
    if (n < 1) throw lva::Error(lva::ErrorCode::InvalidArgument, "thread count must be positive");
    lva::set_num_threads(n);
  });
}

int lva_get_threads(void) { return lva::num_threads(); }

const uint8_t* lva_buffer_data(const lva_buffer* b) { return b ? b->bytes.data() : nullptr; }
size_t lva_buffer_size(const lva_buffer* b) { return b ? b->bytes.size() : 0; }
void lva_buffer_free(lva_buffer* b) { delete b; }

lva_status lva_tensor_create(const size_t* shape, size_t rank, const double* data, lva_tensor** out) {
  return guarded([&] {
    require(shape, "shape");
    require(out, "out");
    lva::Shape s(shape, shape + rank);
    lva::Tensor t(s);
    if (data) std::copy(data, data + t.size(), t.data().begin());
    *out = new lva_tensor{std::move(t)};
  });
}

lva_status lva_tensor_load(const char* path, lva_tensor** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new lva_tensor{lva::load_lvat(path)};
  });
}

lva_status lva_tensor_save(const lva_tensor* t, const char* path, int dtype) {
  return guarded([&] {
    require(t, "tensor");
    require(path, "path");
    if (dtype != 0 && dtype != 1) throw lva::Error(lva::ErrorCode::InvalidArgument, "dtype must be 0 (f32) or 1 (f64)");
    lva::save_lvat(path, t->t, dtype == 0 ? lva::FileDType::F32 : lva::FileDType::F64);
  });
}

size_t lva_tensor_rank(const lva_tensor* t) { return t ? t->t.rank() : 0; }
const size_t* lva_tensor_shape(const lva_tensor* t) { return t ? t->t.shape().data() : nullptr; }
size_t lva_tensor_size(const lva_tensor* t) { return t ? t->t.size() : 0; }
const double* lva_tensor_data(const lva_tensor* t) { return t ? t->t.data().data() : nullptr; }
void lva_tensor_free(lva_tensor* t) { delete t; }

lva_status lva_model_create(const char* config_text, uint64_t seed, lva_model** out) {
  return guarded([&] {
    require(config_text, "config_text");
    require(out, "out");
    const auto cfg = lva::parse_experiment(config_text);
    *out = wrap(lva::init_model(cfg.codec, seed));
  });
}

lva_status lva_model_load(const char* path, lva_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = wrap(lva::load_model(path));
  });
}

lva_status lva_model_save(const lva_model* m, const char* path) {
  return guarded([&] {
    require(m, "model");
    require(path, "path");
    lva::save_model(path, m->m);
  });
}

const char* lva_model_digest(const lva_model* m) { return m ? m->digest.c_str() : ""; }
void lva_model_free(lva_model* m) { delete m; }

lva_status lva_encode(const lva_model* m, const lva_tensor* x, lva_precision p, lva_buffer** out) {
  return guarded([&] {
    require(m, "model");
    require(x, "tensor");
    require(out, "out");
    *out = new lva_buffer{lva::encode_padded(x->t, m->m, precision_of(p))};
  });
}

lva_status lva_decode(const lva_model* m, const uint8_t* bytes, size_t size, lva_precision p, lva_tensor** out) {
  return guarded([&] {
    require(m, "model");
    require(bytes, "bytes");
    require(out, "out");
    *out = new lva_tensor{lva::decode(std::span(bytes, size), m->m, precision_of(p))};
  });
}

lva_status lva_bitstream_inspect(const uint8_t* bytes, size_t size, lva_bitstream_info* out) {
  return guarded([&] {
    require(bytes, "bytes");
    require(out, "out");
    const auto parsed = lva::read_container(std::span(bytes, size));
    const auto& i = parsed.info;
    out->file_bytes = i.file_bytes;
    out->table_bytes = i.table_bytes;
    out->payload_bytes = i.payload_bytes;
    out->symbols = i.symbol_count();
    out->samples = lva::shape_size(i.original_shape);
    out->bits_per_symbol = 8.0 * static_cast<double>(i.payload_bytes) / static_cast<double>(out->symbols);
    out->bits_per_sample = 8.0 * static_cast<double>(i.file_bytes) / static_cast<double>(out->samples);
    out->dimensionality_reduction = lva::dimensionality_reduction(i.original_shape, i.latent_shape);
    out->flags = i.flags;
  });
}

lva_status lva_psnr(const lva_tensor* x, const lva_tensor* x_hat, double peak, double* out) {
  return guarded([&] {
    require(x, "x");
    require(x_hat, "x_hat");
    require(out, "out");
    *out = lva::psnr(x->t, x_hat->t, peak);
  });
}

lva_status lva_eval(const lva_model* m, const lva_tensor* const* inputs, size_t count, lva_precision p,
                    lva_eval_result* out) {
  return guarded([&] {
    require(m, "model");
    require(out, "out");
    if (count && !inputs) throw lva::Error(lva::ErrorCode::InvalidArgument, "inputs must not be null");
    std::vector<lva::Tensor> set;
    for (size_t i = 0; i < count; ++i) {
      require(inputs[i], "input tensor");
      set.push_back(inputs[i]->t);
    }
    const auto r = lva::rd_sweep({{"model", m->m}}, set, precision_of(p)).at(0);
    out->psnr = r.psnr;
    out->bits_per_symbol = r.bits_per_symbol;
    out->bits_per_sample = r.point.rate;
    out->mean_file_bits_per_symbol = r.mean_file_bits_per_symbol;
  });
}

lva_status lva_suggest(int dims, int channels, int channels_as_dimension, double dr, lva_buffer** out) {
  return guarded([&] {
    require(out, "out");
    lva::ModalityDescriptor md;
    md.dims = dims;
    md.channels = channels;
    md.channels_as_dimension = channels_as_dimension != 0;
    const auto s = dr > 0.0 ? lva::suggest_config(md, dr) : lva::suggest_config(md);
    std::string text = s.codec.to_text();
    text += "lambda=" + lva::format_double(s.lambda) + "\n";
    *out = new lva_buffer{std::vector<std::uint8_t>(text.begin(), text.end())};
  });
}

lva_status lva_train(const char* config_text, int override_seed, uint64_t seed, int override_lambda, double lambda,
                     const char* checkpoint_path, lva_train_callback cb, void* user, lva_model** out) {
  return guarded([&] {
    require(config_text, "config_text");
    auto cfg = lva::parse_experiment(config_text);
    if (override_seed) cfg.train.seed = seed;
    if (override_lambda) cfg.train.lambda = lambda;
    cfg.train.validate();
    auto source = lva::make_source(cfg);
    const auto result = lva::run_training(cfg, *source, [&](const lva::StepStats& s) {
      if (!cb) return;
      lva_train_step st{s.step, static_cast<int>(s.phase), s.loss, s.mse, s.variance, s.learning_rate};
      cb(&st, user);
    });
    if (checkpoint_path) lva::save_checkpoint(checkpoint_path, result.state);
    if (out) *out = wrap(result.state.params);
  });
}

lva_status lva_bench(const lva_model* m, const lva_tensor* x, const char* workload, lva_precision p, int repetitions,
                     lva_buffer** json_out) {
  return guarded([&] {
    require(m, "model");
    require(x, "tensor");
    require(workload, "workload");
    require(json_out, "json_out");
    const lva::Precision prec = precision_of(p);
    const std::string w = workload;
    const auto encoded = lva::encode_padded(x->t, m->m, prec);
    std::function<void()> fn;
    if (w == "encode")
      fn = [&] { (void)lva::encode_padded(x->t, m->m, prec); };
    else if (w == "decode")
      fn = [&] { (void)lva::decode(encoded, m->m, prec); };
    else if (w == "roundtrip")
      fn = [&] { (void)lva::decode(lva::encode_padded(x->t, m->m, prec), m->m, prec); };
    else
      throw lva::Error(lva::ErrorCode::InvalidArgument, "unknown workload '" + w + "'");
    auto report = lva::throughput_bench(w, fn, x->t.size(), repetitions, 1);
    report.precision = prec == lva::Precision::Single ? "f32" : "f64";
    report.config_digest = m->digest;
    const std::string json = report.to_json();
    *json_out = new lva_buffer{std::vector<std::uint8_t>(json.begin(), json.end())};
  });
}

}  // extern "C"
