#include "maduv/nn/adam.hpp"

#include <vector>

namespace maduv::nn {

AdamState AdamState::for_params(const ModelParams& params, const AdamConfig& config) {
  return {config, ModelParams::zeros(params.arch), ModelParams::zeros(params.arch), 0};
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
  grads.for_each([](std::string_view name, const std::vector<float>& g) {
    for (float x : g) {
      if (!std::isfinite(x)) throw NumericError("non-finite gradient in " + std::string(name));
    }
  });
  if (params.parameter_count() != grads.parameter_count() ||
      params.parameter_count() != state.m.parameter_count()) {
    throw UsageError("Adam: parameter/gradient/state shapes differ");
  }
  ++state.step;
  std::vector<std::vector<float>*> theta, m, v;
  std::vector<const std::vector<float>*> g;
  params.for_each([&](std::string_view, std::vector<float>& x) { theta.push_back(&x); });
  grads.for_each([&](std::string_view, const std::vector<float>& x) { g.push_back(&x); });
  state.m.for_each([&](std::string_view, std::vector<float>& x) { m.push_back(&x); });
  state.v.for_each([&](std::string_view, std::vector<float>& x) { v.push_back(&x); });
  for (std::size_t i = 0; i < theta.size(); ++i) {
    adam_update<float>(*theta[i], *g[i], *m[i], *v[i], state.config, state.step);
  }
}

}  // namespace maduv::nn
