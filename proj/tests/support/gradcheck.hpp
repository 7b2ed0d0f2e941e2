#pragma once

// Finite-difference gradient checks in float64, one layer at a time and for
// the composed network. Central differences with h = 1e-3; an entry passes
// when |analytic - numeric| <= 1e-3 * max(|analytic|, |numeric|, 1e-6).
//
// Piecewise-linear layers (ReLU, max-pool) are not differentiable at their
// kinks. A perturbation that crosses one makes the central difference
// meaningless, so such draws are detected (the h and h/2 differences
// disagree) and the instance is redrawn. Redraws are counted and bounded.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "maduv/nn/layers.hpp"
#include "maduv/nn/model.hpp"
#include "maduv/rng.hpp"

namespace gradcheck {

using namespace maduv;
using namespace maduv::nn;

constexpr double kH = 1e-3;
constexpr double kTol = 1e-3;

double rel_err(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); }

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

enum class Verdict { pass, fail, kink };

// Checks d loss / d x[i] for every i, where loss() reads x.
Verdict check_all(std::vector<double>& x, std::span<const double> analytic, const std::function<double()>& loss,
                  std::string* detail = nullptr) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    const auto central = [&](double h) {
      x[i] = saved + h;
      const double up = loss();
      x[i] = saved - h;
      const double down = loss();
      x[i] = saved;
      return (up - down) / (2 * h);
    };
    const double n1 = central(kH), n2 = central(kH / 2);
    if (rel_err(n1, n2) > kTol) return Verdict::kink;
    if (rel_err(analytic[i], n1) > kTol) {
      if (detail) *detail = "index " + std::to_string(i) + ": analytic " + std::to_string(analytic[i]) + " numeric " + std::to_string(n1);
      return Verdict::fail;
    }
  }
  return Verdict::pass;
}

struct Report {
  int passed = 0;
  int kinks = 0;
  std::string failure;  // empty on success
  bool ok() const { return failure.empty(); }
};

// Collects `instances` passing instances; fails on the first mismatch or when
// kink redraws reach the instance count.
inline Report run_instances(std::string_view what, int instances,
                            const std::function<Verdict(Rng&, std::string&)>& attempt) {
  Rng rng(std::hash<std::string_view>{}(what));
  Report rep;
  while (rep.passed < instances) {
    std::string detail;
    const Verdict v = attempt(rng, detail);
    if (v == Verdict::fail) {
      rep.failure = std::string(what) + " instance " + std::to_string(rep.passed) + ": " + detail;
      return rep;
    }
    if (v == Verdict::kink) {
      if (++rep.kinks >= instances) {
        rep.failure = std::string(what) + ": too many kink redraws";
        return rep;
      }
      continue;
    }
    ++rep.passed;
  }
  return rep;
}

inline Verdict conv_instance(Rng& rng, std::string& detail) {
  const ConvShape s{2, 3, 4 + rng.below(3), 3 + rng.below(4), rng.below(2) ? 3u : 5u};
  auto in = random_vec(rng, s.in_channels * s.plane());
  auto w = random_vec(rng, s.out_channels * s.col_rows());
  auto b = random_vec(rng, s.out_channels);
  const auto r = random_vec(rng, s.out_channels * s.plane());
  std::vector<double> col;
  const auto loss = [&] {
    std::vector<double> out(r.size());
    conv2d_forward<double>(in, s, w, b, out, col);
    double l = 0;
    for (std::size_t i = 0; i < out.size(); ++i) l += r[i] * out[i];
    return l;
  };
  std::vector<double> dw(w.size()), db(b.size()), din(in.size());
  conv2d_backward<double>(in, s, w, r, dw, db, din, col);
  for (auto* p : {&in, &w, &b}) {
    const auto& g = p == &in ? din : p == &w ? dw : db;
    if (const Verdict v = check_all(*p, g, loss, &detail); v != Verdict::pass) return v;
  }
  return Verdict::pass;
}

inline Verdict relu_instance(Rng& rng, std::string& detail) {
  auto x = random_vec(rng, 30);
  const auto r = random_vec(rng, 30);
  const auto loss = [&] {
    auto y = x;
    relu_forward<double>(y);
    double l = 0;
    for (std::size_t i = 0; i < y.size(); ++i) l += r[i] * y[i];
    return l;
  };
  auto act = x;
  relu_forward<double>(act);
  auto g = r;
  relu_backward<double>(act, g);
  return check_all(x, g, loss, &detail);
}

inline Verdict pool_instance(Rng& rng, std::string& detail) {
  const PoolShape s{2, 5 + rng.below(3), 4 + rng.below(4), 2};
  auto x = random_vec(rng, s.channels * s.height * s.width);
  const auto r = random_vec(rng, s.out_size());
  std::vector<std::uint32_t> arg(s.out_size());
  const auto loss = [&] {
    std::vector<double> out(s.out_size());
    maxpool2d_forward<double>(x, s, out, arg);
    double l = 0;
    for (std::size_t i = 0; i < out.size(); ++i) l += r[i] * out[i];
    return l;
  };
  std::vector<double> out(s.out_size()), din(x.size());
  maxpool2d_forward<double>(x, s, out, arg);
  maxpool2d_backward<double>(r, arg, din);
  return check_all(x, din, loss, &detail);
}

inline Verdict linear_instance(Rng& rng, std::string& detail) {
  const std::size_t n_in = 3 + rng.below(6), n_out = 1 + rng.below(5);
  auto in = random_vec(rng, n_in), w = random_vec(rng, n_in * n_out), b = random_vec(rng, n_out);
  const auto r = random_vec(rng, n_out);
  const auto loss = [&] {
    std::vector<double> out(n_out);
    linear_forward<double>(in, w, b, out);
    double l = 0;
    for (std::size_t i = 0; i < n_out; ++i) l += r[i] * out[i];
    return l;
  };
  std::vector<double> dw(w.size()), db(b.size()), din(in.size());
  linear_backward<double>(in, w, r, dw, db, din);
  for (auto* p : {&in, &w, &b}) {
    const auto& g = p == &in ? din : p == &w ? dw : db;
    if (const Verdict v = check_all(*p, g, loss, &detail); v != Verdict::pass) return v;
  }
  return Verdict::pass;
}

inline Verdict bce_instance(Rng& rng, std::string& detail) {
  const std::size_t n = 1 + rng.below(8);
  auto z = random_vec(rng, n, 6.0);
  std::vector<double> y(n);
  for (auto& v : y) v = static_cast<double>(rng.below(2));
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = (sigmoid(z[i]) - y[i]) / n;
  return check_all(z, g, [&] { return bce_with_logits<double>(z, y); }, &detail);
}

inline Architecture tiny_arch(Rng& rng) {
  Architecture a;
  a.in_height = 5 + static_cast<std::uint32_t>(rng.below(4));
  a.in_width = 6 + static_cast<std::uint32_t>(rng.below(5));
  a.conv1_channels = 2;
  a.conv2_channels = 3;
  a.hidden = 4;
  return a;
}

inline Verdict model_instance(Rng& rng, std::string& detail) {
  const Architecture arch = tiny_arch(rng);
  Params<double> p = convert<double>(init_params(arch, rng.next_u64()));
  // Non-zero biases so that every bias gradient is exercised away from init.
  for (auto* b : {&p.conv1_bias, &p.conv2_bias, &p.fc1_bias, &p.fc2_bias}) {
    for (auto& v : *b) v = rng.uniform(-0.1, 0.1);
  }
  const std::size_t batch = 1 + rng.below(3);
  Tensor<double> x({batch, 1, arch.in_height, arch.in_width}, random_vec(rng, batch * arch.in_height * arch.in_width));
  std::vector<double> y(batch);
  for (auto& v : y) v = static_cast<double>(rng.below(2));

  const auto analytic = backward<double>(p, x, y);
  const auto loss = [&] { return bce_with_logits<double>(forward<double>(p, x), y); };
  if (std::abs(analytic.loss - loss()) > 1e-12) {
    detail = "loss mismatch";
    return Verdict::fail;
  }

  std::vector<std::vector<double>*> params;
  std::vector<const std::vector<double>*> grads;
  p.for_each([&](std::string_view, std::vector<double>& v) { params.push_back(&v); });
  analytic.grads.for_each([&](std::string_view, const std::vector<double>& v) { grads.push_back(&v); });
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (const Verdict v = check_all(*params[k], *grads[k], loss, &detail); v != Verdict::pass) {
      detail = "param array " + std::to_string(k) + " " + detail;
      return v;
    }
  }
  return Verdict::pass;
}

struct Case {
  const char* name;
  Verdict (*attempt)(Rng&, std::string&);
};

inline constexpr Case kCases[] = {{"conv", conv_instance},     {"relu", relu_instance}, {"pool", pool_instance},
                                  {"linear", linear_instance}, {"bce", bce_instance},   {"model", model_instance}};

}  // namespace gradcheck
