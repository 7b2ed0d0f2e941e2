#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "maduv/error.hpp"
#include "maduv/nn/model.hpp"

namespace maduv::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;

  static AdamState for_params(const ModelParams& params, const AdamConfig& config = {});
};

/// One bias-corrected Adam update of a flat parameter array at step t (t >= 1).
template <class T>
void adam_update(std::span<T> theta, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 const AdamConfig& cfg, std::uint64_t t) {
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = static_cast<double>(grad[i]);
    const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * g;
    const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double m_hat = mi / c1;
    const double v_hat = vi / c2;
    theta[i] = static_cast<T>(static_cast<double>(theta[i]) - cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
  }
}

/// Applies one Adam step to every parameter array. Throws NumericError,
/// leaving params and state untouched, if any gradient is non-finite.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state);

}  // namespace maduv::nn
