// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/pointwise.hpp"

#include <string>

namespace lva {

void CompanderParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorCode::Config, "compander gamma must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::Config, "compander epsilon must be positive");
}

void check_scales(std::span<const double> sigma, std::size_t channels) {
  if (sigma.size() != channels)
    throw Error(ErrorCode::Shape, "latent has " + std::to_string(channels) + " channels but " +
                                      std::to_string(sigma.size()) + " Laplacian scales were given");
  for (double s : sigma)
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::Domain, "Laplacian scales must be positive");
}

template <typename T>
BasicTensor<T> compand(const BasicTensor<T>& x, const CompanderParams& p) {
  p.validate();
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = compand_scalar(x[i], p);
  return y;
}

template <typename T>
BasicTensor<T> compand_inverse(const BasicTensor<T>& y, const CompanderParams& p) {
  p.validate();
  BasicTensor<T> x(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = compand_inverse_scalar(y[i], p);
  return x;
}

template <typename T>
BasicTensor<T> latent_cdf(const BasicTensor<T>& z, std::span<const double> sigma) {
  check_scales(sigma, z.channels());
  BasicTensor<T> y(z.shape());
  const std::size_t plane = z.plane();
  for (std::size_t c = 0; c < z.channels(); ++c) {
    const T s = static_cast<T>(sigma[c]);
    for (std::size_t i = 0; i < plane; ++i) y.channel(c)[i] = latent_cdf_scalar(z.channel(c)[i], s);
  }
  return y;
}

template <typename T>
BasicTensor<T> latent_cdf_inverse(const BasicTensor<T>& y, std::span<const double> sigma) {
  check_scales(sigma, y.channels());
  BasicTensor<T> z(y.shape());
  const std::size_t plane = y.plane();
  for (std::size_t c = 0; c < y.channels(); ++c) {
    const T s = static_cast<T>(sigma[c]);
    for (std::size_t i = 0; i < plane; ++i) {
      const T v = y.channel(c)[i];
      if (!(std::abs(v) <= T(kLatentBound)))
        throw Error(ErrorCode::Domain, "latent value " + std::to_string(static_cast<double>(v)) +
                                           " outside [-127, 127]");
      z.channel(c)[i] = latent_cdf_inverse_scalar(v, s);
    }
  }
  return z;
}

template <typename T>
BasicTensor<T> quantize_hard(const BasicTensor<T>& y) {
  BasicTensor<T> q(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) q[i] = quantize_hard_scalar(y[i]);
  return q;
}

template <typename T>
BasicTensor<T> quantize_soft(const BasicTensor<T>& y, Rng& rng) {
  BasicTensor<T> q(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) q[i] = y[i] + static_cast<T>(rng.uniform() - 0.5);
  return q;
}

#define LVA_INSTANTIATE(T)                                                              \
  template BasicTensor<T> compand(const BasicTensor<T>&, const CompanderParams&);         \
  template BasicTensor<T> compand_inverse(const BasicTensor<T>&, const CompanderParams&); \
  template BasicTensor<T> latent_cdf(const BasicTensor<T>&, std::span<const double>);     \
  template BasicTensor<T> latent_cdf_inverse(const BasicTensor<T>&, std::span<const double>); \
  template BasicTensor<T> quantize_hard(const BasicTensor<T>&);                           \
  template BasicTensor<T> quantize_soft(const BasicTensor<T>&, Rng&);

LVA_INSTANTIATE(float)
LVA_INSTANTIATE(double)
#undef LVA_INSTANTIATE

}  // namespace lva
