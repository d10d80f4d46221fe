/* Copyright 2026 The LiVeAction Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef LIVEACTION_LIVEACTION_H_
#define LIVEACTION_LIVEACTION_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LVA_API __declspec(dllexport)
#else
#define LVA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lva_status {
  LVA_OK = 0,
  LVA_ERR_SHAPE = 1,
  LVA_ERR_CONFIG = 2,
  LVA_ERR_DOMAIN = 3,
  LVA_ERR_DECODE = 4,
  LVA_ERR_PARAM_MISMATCH = 5,
  LVA_ERR_IO = 6,
  LVA_ERR_NOT_FOUND = 7,
  LVA_ERR_INVALID_ARGUMENT = 8,
  LVA_ERR_INTERNAL = 9
} lva_status;

typedef enum lva_precision { LVA_F32 = 0, LVA_F64 = 1 } lva_precision;

typedef struct lva_tensor lva_tensor;
typedef struct lva_model lva_model;
typedef struct lva_buffer lva_buffer;

/* Message of the last failed call on this thread ("" if none). */
LVA_API const char* lva_last_error(void);
/* Byte offset of the last decode error on this thread, or -1. */
LVA_API int64_t lva_last_error_offset(void);
LVA_API const char* lva_status_name(lva_status s);
LVA_API const char* lva_version(void);

LVA_API lva_status lva_set_threads(int n);
LVA_API int lva_get_threads(void);

/* Byte buffers returned by the library. */
LVA_API const uint8_t* lva_buffer_data(const lva_buffer* b);
LVA_API size_t lva_buffer_size(const lva_buffer* b);
LVA_API void lva_buffer_free(lva_buffer* b);

/* Tensors: channel axis first, row-major doubles. */
LVA_API lva_status lva_tensor_create(const size_t* shape, size_t rank, const double* data, lva_tensor** out);
LVA_API lva_status lva_tensor_load(const char* path, lva_tensor** out);
/* dtype 0 stores f32, 1 stores f64. */
LVA_API lva_status lva_tensor_save(const lva_tensor* t, const char* path, int dtype);
LVA_API size_t lva_tensor_rank(const lva_tensor* t);
LVA_API const size_t* lva_tensor_shape(const lva_tensor* t);
LVA_API size_t lva_tensor_size(const lva_tensor* t);
LVA_API const double* lva_tensor_data(const lva_tensor* t);
LVA_API void lva_tensor_free(lva_tensor* t);

/* Models. `config_text` uses the key=value training config format. */
LVA_API lva_status lva_model_create(const char* config_text, uint64_t seed, lva_model** out);
/* Accepts model files and training checkpoints. */
LVA_API lva_status lva_model_load(const char* path, lva_model** out);
LVA_API lva_status lva_model_save(const lva_model* m, const char* path);
/* 16 hex digits identifying the model configuration. */
LVA_API const char* lva_model_digest(const lva_model* m);
LVA_API void lva_model_free(lva_model* m);

/* Encodes with replicate padding to a multiple of 2^J. */
LVA_API lva_status lva_encode(const lva_model* m, const lva_tensor* x, lva_precision p, lva_buffer** out);
LVA_API lva_status lva_decode(const lva_model* m, const uint8_t* bytes, size_t size, lva_precision p,
                              lva_tensor** out);

typedef struct lva_bitstream_info {
  size_t file_bytes;
  size_t table_bytes;
  size_t payload_bytes;
  size_t symbols;
  size_t samples;
  double bits_per_symbol;
  double bits_per_sample;
  double dimensionality_reduction;
  uint8_t flags;
} lva_bitstream_info;

LVA_API lva_status lva_bitstream_inspect(const uint8_t* bytes, size_t size, lva_bitstream_info* out);

LVA_API lva_status lva_psnr(const lva_tensor* x, const lva_tensor* x_hat, double peak, double* out);

typedef struct lva_eval_result {
  double psnr;
  double bits_per_symbol;
  double bits_per_sample;
  double mean_file_bits_per_symbol;
} lva_eval_result;

/* Encodes and decodes every input; the rate pools latents across inputs. */
LVA_API lva_status lva_eval(const lva_model* m, const lva_tensor* const* inputs, size_t count, lva_precision p,
                            lva_eval_result* out);

/* Suggested configuration as key=value text (codec keys plus lambda).
   A dimensionality_reduction <= 0 selects the default of 64. */
LVA_API lva_status lva_suggest(int dims, int channels, int channels_as_dimension, double dimensionality_reduction,
                               lva_buffer** out);

typedef struct lva_train_step {
  int64_t step;
  int phase; /* 0 soft, 1 hard with frozen encoder */
  double loss;
  double mse;
  double variance;
  double learning_rate;
} lva_train_step;

typedef void (*lva_train_callback)(const lva_train_step* step, void* user);

/* Trains from a key=value config. `seed` overrides the config seed when
 * `override_seed` is nonzero, `lambda` likewise when `override_lambda` is
 * nonzero. Writes a checkpoint to `checkpoint_path` if it is not NULL. */
LVA_API lva_status lva_train(const char* config_text, int override_seed, uint64_t seed, int override_lambda,
                             double lambda, const char* checkpoint_path, lva_train_callback cb, void* user,
                             lva_model** out);

/* Times encode (or decode) of `x` and returns the JSON report. workload is
 * "encode", "decode" or "roundtrip". */
LVA_API lva_status lva_bench(const lva_model* m, const lva_tensor* x, const char* workload, lva_precision p,
                             int repetitions, lva_buffer** json_out);

#ifdef __cplusplus
}
#endif

#endif /* LIVEACTION_LIVEACTION_H_ */
