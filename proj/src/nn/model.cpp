#include "maduv/nn/model.hpp"

#include <cmath>
#include <string>

#include "maduv/error.hpp"
#include "maduv/nn/layers.hpp"
#include "maduv/rng.hpp"

namespace maduv::nn {

void Architecture::validate() const {
  if (kernel == 0 || kernel % 2 == 0) throw UsageError("kernel size must be odd");
  if (pool == 0 || conv1_channels == 0 || conv2_channels == 0 || hidden == 0) {
    throw UsageError("architecture sizes must be positive");
  }
  if (pooled2_height() == 0 || pooled2_width() == 0) {
    throw UsageError("input " + std::to_string(in_height) + "x" + std::to_string(in_width) +
                     " too small for two pooling stages");
  }
}

template <class T>
Params<T> Params<T>::zeros(const Architecture& arch) {
  arch.validate();
  Params p;
  p.arch = arch;
  const std::size_t kk = std::size_t{arch.kernel} * arch.kernel;
  p.conv1_weight.assign(arch.conv1_channels * kk, T{});
  p.conv1_bias.assign(arch.conv1_channels, T{});
  p.conv2_weight.assign(std::size_t{arch.conv2_channels} * arch.conv1_channels * kk, T{});
  p.conv2_bias.assign(arch.conv2_channels, T{});
  p.fc1_weight.assign(arch.hidden * arch.flat_size(), T{});
  p.fc1_bias.assign(arch.hidden, T{});
  p.fc2_weight.assign(arch.hidden, T{});
  p.fc2_bias.assign(1, T{});
  return p;
}

template <class T>
std::size_t Params<T>::parameter_count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const std::vector<T>& v) { n += v.size(); });
  return n;
}

ModelParams init_params(const Architecture& arch, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(arch);
  Rng rng(seed);
  const auto fill = [&](std::vector<float>& w, std::size_t fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (float& v : w) v = static_cast<float>(rng.uniform(-bound, bound));
  };
  const std::size_t kk = std::size_t{arch.kernel} * arch.kernel;
  fill(p.conv1_weight, kk);
  fill(p.conv2_weight, arch.conv1_channels * kk);
  fill(p.fc1_weight, arch.flat_size());
  fill(p.fc2_weight, arch.hidden);
  return p;
}

namespace {

// Per-sample activations kept for the backward pass.
template <class T>
struct Workspace {
  explicit Workspace(const Architecture& a)
      : conv1{1, a.conv1_channels, a.in_height, a.in_width, a.kernel},
        pool1{a.conv1_channels, a.in_height, a.in_width, a.pool},
        conv2{a.conv1_channels, a.conv2_channels, a.pooled1_height(), a.pooled1_width(), a.kernel},
        pool2{a.conv2_channels, a.pooled1_height(), a.pooled1_width(), a.pool},
        act1(conv1.out_channels * conv1.plane()),
        pooled1(pool1.out_size()),
        arg1(pool1.out_size()),
        act2(conv2.out_channels * conv2.plane()),
        pooled2(pool2.out_size()),
        arg2(pool2.out_size()),
        hidden(a.hidden) {}

  ConvShape conv1;
  PoolShape pool1;
  ConvShape conv2;
  PoolShape pool2;
  std::vector<T> act1, pooled1;
  std::vector<std::uint32_t> arg1;
  std::vector<T> act2, pooled2;
  std::vector<std::uint32_t> arg2;
  std::vector<T> hidden;
  std::vector<T> col;
};

template <class T>
T run_forward(const Params<T>& p, std::span<const T> x, Workspace<T>& ws) {
  conv2d_forward<T>(x, ws.conv1, p.conv1_weight, p.conv1_bias, ws.act1, ws.col);
  relu_forward<T>(ws.act1);
  maxpool2d_forward<T>(ws.act1, ws.pool1, ws.pooled1, ws.arg1);
  conv2d_forward<T>(ws.pooled1, ws.conv2, p.conv2_weight, p.conv2_bias, ws.act2, ws.col);
  relu_forward<T>(ws.act2);
  maxpool2d_forward<T>(ws.act2, ws.pool2, ws.pooled2, ws.arg2);
  linear_forward<T>(ws.pooled2, p.fc1_weight, p.fc1_bias, ws.hidden);
  relu_forward<T>(ws.hidden);
  T logit{};
  linear_forward<T>(ws.hidden, p.fc2_weight, p.fc2_bias, std::span<T>(&logit, 1));
  return logit;
}

template <class T>
std::size_t check_batch(const Architecture& a, const Tensor<T>& batch) {
  const auto& s = batch.shape();
  const bool ok4 = s.size() == 4 && s[1] == 1 && s[2] == a.in_height && s[3] == a.in_width;
  const bool ok3 = s.size() == 3 && s[1] == a.in_height && s[2] == a.in_width;
  if (!ok4 && !ok3) {
    std::string got;
    for (auto d : s) got += (got.empty() ? "" : ",") + std::to_string(d);
    throw UsageError("batch shape [" + got + "] does not match architecture input [B,1," +
                     std::to_string(a.in_height) + "," + std::to_string(a.in_width) + "]");
  }
  return s[0];
}

}  // namespace

template <class T>
T forward_one(const Params<T>& params, std::span<const T> input) {
  if (input.size() != std::size_t{params.arch.in_height} * params.arch.in_width) {
    throw UsageError("input size does not match architecture");
  }
  Workspace<T> ws(params.arch);
  return run_forward(params, input, ws);
}

template <class T>
std::vector<T> forward(const Params<T>& params, const Tensor<T>& batch) {
  const std::size_t b = check_batch(params.arch, batch);
  Workspace<T> ws(params.arch);
  std::vector<T> logits(b);
  for (std::size_t i = 0; i < b; ++i) logits[i] = run_forward(params, batch.slice(i), ws);
  return logits;
}

template <class T>
LossAndGradients<T> backward(const Params<T>& p, const Tensor<T>& batch, std::span<const T> labels) {
  const std::size_t b = check_batch(p.arch, batch);
  if (labels.size() != b) throw UsageError("label count does not match batch size");
  LossAndGradients<T> out{0.0, Params<T>::zeros(p.arch)};
  auto& g = out.grads;
  Workspace<T> ws(p.arch);
  std::vector<T> d_hidden(p.arch.hidden), d_pooled2(ws.pooled2.size()), d_act2(ws.act2.size());
  std::vector<T> d_pooled1(ws.pooled1.size()), d_act1(ws.act1.size());
  std::vector<T> logits(b);

  for (std::size_t i = 0; i < b; ++i) {
    const auto x = batch.slice(i);
    const T z = run_forward(p, x, ws);
    logits[i] = z;
    const T y = labels[i];
    if (y != T{0} && y != T{1}) throw DataError("label outside {0,1}");
    const T dz = (sigmoid(z) - y) / static_cast<T>(b);

    linear_backward<T>(ws.hidden, p.fc2_weight, std::span<const T>(&dz, 1), g.fc2_weight, g.fc2_bias,
                       d_hidden);
    relu_backward<T>(ws.hidden, d_hidden);
    linear_backward<T>(ws.pooled2, p.fc1_weight, d_hidden, g.fc1_weight, g.fc1_bias, d_pooled2);
    maxpool2d_backward<T>(d_pooled2, ws.arg2, d_act2);
    relu_backward<T>(ws.act2, d_act2);
    conv2d_backward<T>(ws.pooled1, ws.conv2, p.conv2_weight, d_act2, g.conv2_weight, g.conv2_bias, d_pooled1,
                       ws.col);
    maxpool2d_backward<T>(d_pooled1, ws.arg1, d_act1);
    relu_backward<T>(ws.act1, d_act1);
    conv2d_backward<T>(x, ws.conv1, p.conv1_weight, d_act1, g.conv1_weight, g.conv1_bias, std::span<T>{},
                       ws.col);
  }
  out.loss = bce_with_logits<T>(logits, labels);
  return out;
}

template struct Params<float>;
template struct Params<double>;
template float forward_one(const Params<float>&, std::span<const float>);
template double forward_one(const Params<double>&, std::span<const double>);
template std::vector<float> forward(const Params<float>&, const Tensor<float>&);
template std::vector<double> forward(const Params<double>&, const Tensor<double>&);
template LossAndGradients<float> backward(const Params<float>&, const Tensor<float>&, std::span<const float>);
template LossAndGradients<double> backward(const Params<double>&, const Tensor<double>&,
                                           std::span<const double>);

}  // namespace maduv::nn
