#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "maduv/nn/tensor.hpp"

namespace maduv::nn {

/// conv(k, same) -> ReLU -> maxpool -> conv(k, same) -> ReLU -> maxpool ->
/// flatten -> linear(hidden) -> ReLU -> linear(1).
struct Architecture {
  std::uint32_t in_height = 59;
  std::uint32_t in_width = 500;
  std::uint32_t conv1_channels = 16;
  std::uint32_t conv2_channels = 32;
  std::uint32_t kernel = 3;
  std::uint32_t pool = 2;
  std::uint32_t hidden = 128;

  std::size_t pooled1_height() const { return in_height / pool; }
  std::size_t pooled1_width() const { return in_width / pool; }
  std::size_t pooled2_height() const { return pooled1_height() / pool; }
  std::size_t pooled2_width() const { return pooled1_width() / pool; }
  std::size_t flat_size() const { return conv2_channels * pooled2_height() * pooled2_width(); }

  /// Throws UsageError when any stage would be empty or the kernel is even.
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

template <class T>
struct Params {
  Architecture arch;
  std::vector<T> conv1_weight;  // [c1, 1, k, k]
  std::vector<T> conv1_bias;    // [c1]
  std::vector<T> conv2_weight;  // [c2, c1, k, k]
  std::vector<T> conv2_bias;    // [c2]
  std::vector<T> fc1_weight;    // [hidden, flat]
  std::vector<T> fc1_bias;      // [hidden]
  std::vector<T> fc2_weight;    // [1, hidden]
  std::vector<T> fc2_bias;      // [1]

  static Params zeros(const Architecture& arch);

  /// Visits every parameter array in declaration order.
  template <class F>
  void for_each(F&& f) {
    f("conv1.weight", conv1_weight);
    f("conv1.bias", conv1_bias);
    f("conv2.weight", conv2_weight);
    f("conv2.bias", conv2_bias);
    f("fc1.weight", fc1_weight);
    f("fc1.bias", fc1_bias);
    f("fc2.weight", fc2_weight);
    f("fc2.bias", fc2_bias);
  }
  template <class F>
  void for_each(F&& f) const {
    const_cast<Params*>(this)->for_each([&](std::string_view name, std::vector<T>& v) {
      f(name, static_cast<const std::vector<T>&>(v));
    });
  }

  std::size_t parameter_count() const;
  friend bool operator==(const Params&, const Params&) = default;
};

using ModelParams = Params<float>;

/// He-style uniform fan-in initialization, U(-sqrt(6/fan_in), +sqrt(6/fan_in)); zero biases.
ModelParams init_params(const Architecture& arch, std::uint64_t seed);

template <class To, class From>
Params<To> convert(const Params<From>& p) {
  Params<To> out;
  out.arch = p.arch;
  auto copy = [](const std::vector<From>& v) { return std::vector<To>(v.begin(), v.end()); };
  out.conv1_weight = copy(p.conv1_weight);
  out.conv1_bias = copy(p.conv1_bias);
  out.conv2_weight = copy(p.conv2_weight);
  out.conv2_bias = copy(p.conv2_bias);
  out.fc1_weight = copy(p.fc1_weight);
  out.fc1_bias = copy(p.fc1_bias);
  out.fc2_weight = copy(p.fc2_weight);
  out.fc2_bias = copy(p.fc2_bias);
  return out;
}

/// Raw logits for a batch shaped [B, 1, H, W] (or [B, H, W]).
template <class T>
std::vector<T> forward(const Params<T>& params, const Tensor<T>& batch);

/// Logit for one [H, W] input.
template <class T>
T forward_one(const Params<T>& params, std::span<const T> input);

template <class T>
struct LossAndGradients {
  double loss = 0.0;
  Params<T> grads;
};

/// Mean BCE-with-logits over the batch and its exact gradients.
template <class T>
LossAndGradients<T> backward(const Params<T>& params, const Tensor<T>& batch, std::span<const T> labels);

}  // namespace maduv::nn
