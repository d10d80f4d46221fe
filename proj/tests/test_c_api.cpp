// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through the C header only.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "liveaction/liveaction.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      std::fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static const char* kModel =
    "dims=2\nchannels=3\nlevels=2\nlatent_channels=4\nenc_depth=1\ndec_depth=1\n";

static void steps(const lva_train_step* s, void* user) {
  auto* count = static_cast<int*>(user);
  ++*count;
  (void)s;
}

int main() {
  EXPECT(std::strcmp(lva_version(), "0.1.0") == 0);
  EXPECT(std::strcmp(lva_status_name(LVA_ERR_DECODE), "decode error") == 0);

  lva_model* m = nullptr;
  EXPECT(lva_model_create(kModel, 3, &m) == LVA_OK);
  EXPECT(std::strlen(lva_model_digest(m)) == 16);

  std::vector<double> px(3 * 16 * 16);
  for (size_t i = 0; i < px.size(); ++i) px[i] = 0.5 + 0.4 * std::sin(0.37 * static_cast<double>(i));
  const size_t shape[] = {3, 16, 16};
  lva_tensor* x = nullptr;
  EXPECT(lva_tensor_create(shape, 3, px.data(), &x) == LVA_OK);
  EXPECT(lva_tensor_rank(x) == 3 && lva_tensor_size(x) == px.size());

  lva_buffer* bits = nullptr;
  EXPECT(lva_encode(m, x, LVA_F64, &bits) == LVA_OK);
  lva_bitstream_info info{};
  EXPECT(lva_bitstream_inspect(lva_buffer_data(bits), lva_buffer_size(bits), &info) == LVA_OK);
  EXPECT(info.file_bytes == lva_buffer_size(bits));
  EXPECT(info.symbols == 4 * 4 * 4);
  EXPECT(info.dimensionality_reduction == 12.0);

  lva_tensor* y = nullptr;
  EXPECT(lva_decode(m, lva_buffer_data(bits), lva_buffer_size(bits), LVA_F64, &y) == LVA_OK);
  EXPECT(lva_tensor_rank(y) == 3 && lva_tensor_shape(y)[2] == 16);
  double p = 0.0;
  EXPECT(lva_psnr(x, y, 1.0, &p) == LVA_OK && std::isfinite(p));

  // Error reporting: corrupt magic, mismatched model, null pointers.
  std::vector<uint8_t> bad(lva_buffer_data(bits), lva_buffer_data(bits) + lva_buffer_size(bits));
  bad[0] = 'Q';
  lva_tensor* z = nullptr;
  EXPECT(lva_decode(m, bad.data(), bad.size(), LVA_F64, &z) == LVA_ERR_DECODE);
  EXPECT(z == nullptr);
  EXPECT(lva_last_error_offset() == 0);
  EXPECT(std::strlen(lva_last_error()) > 0);
  lva_model* other = nullptr;
  EXPECT(lva_model_create("dims=2\nchannels=3\nlevels=2\nlatent_channels=8\nenc_depth=1\ndec_depth=1\n", 3, &other) ==
         LVA_OK);
  EXPECT(lva_decode(other, lva_buffer_data(bits), lva_buffer_size(bits), LVA_F64, &z) == LVA_ERR_PARAM_MISMATCH);
  lva_buffer* none = nullptr;
  EXPECT(lva_encode(nullptr, x, LVA_F64, &none) == LVA_ERR_INVALID_ARGUMENT);
  EXPECT(lva_model_load("/nonexistent/model.lvam", &other) == LVA_ERR_NOT_FOUND);
  EXPECT(lva_model_create("dims=2\nbogus=1\n", 1, &other) == LVA_ERR_CONFIG);
  EXPECT(lva_set_threads(0) == LVA_ERR_INVALID_ARGUMENT);

  lva_eval_result ev{};
  const lva_tensor* inputs[] = {x, x};
  EXPECT(lva_eval(m, inputs, 2, LVA_F64, &ev) == LVA_OK);
  EXPECT(std::fabs(ev.psnr - p) < 1e-9);

  lva_buffer* sug = nullptr;
  EXPECT(lva_suggest(2, 3, 0, 0.0, &sug) == LVA_OK);
  const std::string text(reinterpret_cast<const char*>(lva_buffer_data(sug)), lva_buffer_size(sug));
  EXPECT(text.find("latent_channels=12") != std::string::npos);
  EXPECT(text.find("lambda=0.03") != std::string::npos);
  EXPECT(lva_suggest(3, 5, 0, 0.0, &sug) == LVA_ERR_CONFIG);

  lva_buffer* json = nullptr;
  EXPECT(lva_bench(m, x, "roundtrip", LVA_F32, 3, &json) == LVA_OK);
  const std::string js(reinterpret_cast<const char*>(lva_buffer_data(json)), lva_buffer_size(json));
  EXPECT(js.find("median_samples_per_second") != std::string::npos);
  EXPECT(lva_bench(m, x, "nap", LVA_F32, 3, &json) == LVA_ERR_INVALID_ARGUMENT);

  int count = 0;
  lva_model* trained = nullptr;
  EXPECT(lva_train("dims=1\nchannels=1\nlevels=3\nlatent_channels=2\nenc_depth=1\ndec_depth=1\nextents=64\n"
                   "total_steps=6\nbatch_size=1\n",
                   0, 0, 1, 0.0, nullptr, steps, &count, &trained) == LVA_OK);
  EXPECT(count == 6);

  lva_model_free(trained);
  lva_buffer_free(json);
  lva_buffer_free(sug);
  lva_model_free(other);
  lva_tensor_free(y);
  lva_buffer_free(bits);
  lva_tensor_free(x);
  lva_model_free(m);
  lva_tensor_free(nullptr);
  lva_model_free(nullptr);
  lva_buffer_free(nullptr);

  if (failures == 0) std::printf("c api: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
