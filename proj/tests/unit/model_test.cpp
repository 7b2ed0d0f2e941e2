#include "maduv/nn/model.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "maduv/binary_io.hpp"
#include "maduv/error.hpp"
#include "maduv/nn/adam.hpp"
#include "maduv/nn/checkpoint.hpp"
#include "maduv/nn/layers.hpp"
#include "maduv/rng.hpp"

namespace maduv::nn {
namespace {

Architecture small_arch() {
  Architecture a;
  a.in_height = 8;
  a.in_width = 12;
  a.conv1_channels = 3;
  a.conv2_channels = 4;
  a.hidden = 6;
  return a;
}

Tensor<float> random_batch(Rng& rng, const Architecture& a, std::size_t b) {
  Tensor<float> t({b, 1, a.in_height, a.in_width});
  for (auto& v : t.data()) v = static_cast<float>(rng.normal());
  return t;
}

TEST(Model, DefaultArchitectureDims) {
  const Architecture a;
  EXPECT_EQ(a.pooled1_height(), 29u);
  EXPECT_EQ(a.pooled1_width(), 250u);
  EXPECT_EQ(a.pooled2_height(), 14u);
  EXPECT_EQ(a.pooled2_width(), 125u);
  EXPECT_EQ(a.flat_size(), 32u * 14 * 125);
}

TEST(Model, ZeroParamsGiveZeroLogits) {
  Rng rng(1);
  const auto p = ModelParams::zeros(small_arch());
  for (float z : forward(p, random_batch(rng, small_arch(), 5))) EXPECT_EQ(z, 0.0f);
}

TEST(Model, ChallengeShapedBatchGivesOneLogitPerItem) {
  Rng rng(2);
  const Architecture a;
  const auto logits = forward(init_params(a, 0), random_batch(rng, a, 2));
  ASSERT_EQ(logits.size(), 2u);
  EXPECT_TRUE(std::isfinite(logits[0]) && std::isfinite(logits[1]));
}

TEST(Model, RejectsShapeMismatch) {
  Rng rng(3);
  Architecture other = small_arch();
  other.in_width = 10;
  EXPECT_THROW(forward(init_params(small_arch(), 0), random_batch(rng, other, 1)), Error);
}

// Input 1..16 (4x4). conv1 = identity kernel; pool -> [[6,8],[14,16]].
// conv2: centre 1, right neighbour 0.5, bias -1 -> [[9,7],[21,15]]; pool -> 21.
// fc1: w = [0.1, -0.2], b = [0, 1] -> relu([2.1, -3.2]) = [2.1, 0].
// fc2: w = [2, 5], b = -0.5 -> 3.7.
TEST(Model, HandComputedTinyForward) {
  Architecture a;
  a.in_height = 4;
  a.in_width = 4;
  a.conv1_channels = 1;
  a.conv2_channels = 1;
  a.hidden = 2;
  auto p = Params<double>::zeros(a);
  p.conv1_weight[4] = 1.0;
  p.conv2_weight[4] = 1.0;
  p.conv2_weight[5] = 0.5;
  p.conv2_bias[0] = -1.0;
  p.fc1_weight = {0.1, -0.2};
  p.fc1_bias = {0.0, 1.0};
  p.fc2_weight = {2.0, 5.0};
  p.fc2_bias = {-0.5};
  std::vector<double> x(16);
  for (int i = 0; i < 16; ++i) x[i] = i + 1;
  EXPECT_NEAR(forward_one<double>(p, x), 3.7, 1e-12);
  EXPECT_NEAR(forward_one<float>(convert<float>(p), std::vector<float>(x.begin(), x.end())), 3.7f, 1e-5f);
}

TEST(Model, FloatAndDoublePathsAgree) {
  Rng rng(4);
  const auto pf = init_params(small_arch(), 7);
  const auto batch = random_batch(rng, small_arch(), 4);
  const Tensor<double> bd(batch.shape(), std::vector<double>(batch.data().begin(), batch.data().end()));
  const auto lf = forward(pf, batch);
  const auto ld = forward(convert<double>(pf), bd);
  for (std::size_t i = 0; i < lf.size(); ++i) EXPECT_NEAR(lf[i], ld[i], 1e-4 * (1 + std::abs(ld[i])));
}

TEST(Model, BatchOrderEquivariance) {
  Rng rng(5);
  const auto p = init_params(small_arch(), 1);
  const auto batch = random_batch(rng, small_arch(), 4);
  const std::size_t perm[] = {2, 0, 3, 1};
  Tensor<float> permuted(batch.shape());
  for (std::size_t i = 0; i < 4; ++i) {
    std::copy(batch.slice(perm[i]).begin(), batch.slice(perm[i]).end(), permuted.slice(i).begin());
  }
  const auto a = forward(p, batch), b = forward(p, permuted);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(b[i], a[perm[i]]);
}

TEST(Model, InitIsSeeded) {
  EXPECT_EQ(init_params(small_arch(), 9), init_params(small_arch(), 9));
  EXPECT_NE(init_params(small_arch(), 9), init_params(small_arch(), 10));
  const auto p = init_params(small_arch(), 9);
  const float bound = std::sqrt(6.0f / 9.0f);
  for (float w : p.conv1_weight) EXPECT_LE(std::abs(w), bound);
  for (float b : p.fc1_bias) EXPECT_EQ(b, 0.0f);
}

TEST(Backward, ZeroInputZeroWeightsBiasGradient) {
  const Architecture a = small_arch();
  const auto p = ModelParams::zeros(a);
  const Tensor<float> x({4, 1, a.in_height, a.in_width});
  const std::vector<float> y = {1, 0, 1, 1};
  const auto g = backward<float>(p, x, y);
  EXPECT_FLOAT_EQ(g.grads.fc2_bias[0], (0.5f - 1 + 0.5f + 0.5f - 1 + 0.5f - 1) / 4);
  EXPECT_NEAR(g.loss, std::log(2.0), 1e-6);
}

TEST(Backward, DuplicatedBatchMatchesSingleSample) {
  Rng rng(6);
  const auto p = init_params(small_arch(), 2);
  const auto one = random_batch(rng, small_arch(), 1);
  Tensor<float> two({2, 1, small_arch().in_height, small_arch().in_width});
  std::copy(one.data().begin(), one.data().end(), two.slice(0).begin());
  std::copy(one.data().begin(), one.data().end(), two.slice(1).begin());
  const std::vector<float> y1 = {1}, y2 = {1, 1};
  const auto a = backward<float>(p, one, y1), b = backward<float>(p, two, y2);
  EXPECT_NEAR(a.loss, b.loss, 1e-7);
  std::vector<const std::vector<float>*> ga, gb;
  a.grads.for_each([&](std::string_view, const std::vector<float>& v) { ga.push_back(&v); });
  b.grads.for_each([&](std::string_view, const std::vector<float>& v) { gb.push_back(&v); });
  for (std::size_t k = 0; k < ga.size(); ++k) {
    for (std::size_t i = 0; i < ga[k]->size(); ++i) EXPECT_NEAR((*ga[k])[i], (*gb[k])[i], 1e-6f);
  }
}

// Full-batch Adam on a tiny separable set: loss never rises by more than 5%
// between steps and falls below 0.1 within 200 steps.
TEST(Training, TinySeparableLossDecreases) {
  Rng rng(7);
  const Architecture a = small_arch();
  Tensor<float> x({8, 1, a.in_height, a.in_width});
  std::vector<float> y(8);
  for (std::size_t i = 0; i < 8; ++i) {
    y[i] = static_cast<float>(i % 2);
    for (auto& v : x.slice(i)) v = static_cast<float>(0.3 * rng.normal() + (y[i] > 0 ? 1.0 : -1.0));
  }
  auto p = init_params(a, 3);
  auto state = AdamState::for_params(p, {.lr = 1e-2});
  double prev = 1e300;
  int reached = -1;
  for (int step = 0; step < 200; ++step) {
    const auto g = backward<float>(p, x, y);
    EXPECT_LE(g.loss, prev * 1.05) << step;
    prev = g.loss;
    if (g.loss < 0.1) {
      reached = step;
      break;
    }
    adam_step(p, g.grads, state);
  }
  EXPECT_GE(reached, 0) << "final loss " << prev;
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto p = init_params(small_arch(), 11);
  const auto path = std::filesystem::temp_directory_path() / "maduv_model_test.mdvc";
  write_checkpoint(p, path);
  EXPECT_EQ(read_checkpoint(path), p);
  const auto bytes = io::read_file(path);
  EXPECT_EQ(std::memcmp(bytes.data(), "MDVC", 4), 0);
  std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptionIsDetected) {
  const auto good = encode_checkpoint(init_params(small_arch(), 12));
  auto bad = good;
  bad[1] = std::byte{'X'};
  EXPECT_THROW(decode_checkpoint(bad), DataError);
  bad = good;
  bad.pop_back();
  EXPECT_THROW(decode_checkpoint(bad), DataError);
  bad = good;
  bad[4] = std::byte{9};
  EXPECT_THROW(decode_checkpoint(bad), DataError);
}

}  // namespace
}  // namespace maduv::nn
