#include "maduv/fft.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "maduv/rng.hpp"
#include "oracles.hpp"

namespace maduv {
namespace {

double max_relative_error(std::span<const cdouble> got, std::span<const cdouble> want) {
  double scale = 0.0, err = 0.0;
  for (const auto& w : want) scale = std::max(scale, std::abs(w));
  for (std::size_t k = 0; k < want.size(); ++k) err = std::max(err, std::abs(got[k] - want[k]));
  return err / std::max(scale, 1e-300);
}

std::vector<double> random_signal(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

TEST(Fft, ImpulseIsFlat) {
  const std::vector<double> x = {1, 0, 0, 0};
  const auto X = fft_real(std::span<const double>(x));
  ASSERT_EQ(X.size(), 3u);
  for (const auto& v : X) {
    EXPECT_NEAR(v.real(), 1.0, 1e-15);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
  }
}

TEST(Fft, ConstantSignalConcentratesAtDc) {
  for (std::size_t n : {1u, 2u, 7u, 12u, 97u, 300u, 1024u, 3001u}) {
    const std::vector<double> x(n, 1.0);
    const auto X = fft_real(std::span<const double>(x));
    EXPECT_NEAR(X[0].real(), static_cast<double>(n), 1e-9 * n);
    for (std::size_t k = 1; k < X.size(); ++k) EXPECT_LT(std::abs(X[k]), 1e-9 * n) << n << ':' << k;
  }
}

TEST(Fft, MatchesNaiveDftForAllSmallLengths) {
  Rng rng(17);
  for (std::size_t n = 1; n <= 128; ++n) {
    const auto x = random_signal(rng, n);
    const auto want = oracle::naive_dft_real(x);
    EXPECT_LT(max_relative_error(fft_real(std::span<const double>(x)), want), 1e-12) << n;
  }
}

// Covers every butterfly: radix 2/3/4/5, generic primes up to the direct
// limit, and Bluestein for larger primes and prime powers.
TEST(Fft, MatchesNaiveDftAcrossFactorizations) {
  Rng rng(18);
  for (std::size_t n : {243u, 250u, 256u, 343u, 361u, 509u, 1000u, 1009u, 2 * 1009u, 3721u, 4096u, 4097u, 6000u}) {
    const auto x = random_signal(rng, n);
    EXPECT_LT(max_relative_error(fft_real(std::span<const double>(x)), oracle::naive_dft_real(x)), 1e-11) << n;
  }
}

TEST(Fft, ComplexPlanMatchesDefinition) {
  Rng rng(19);
  for (std::size_t n : {1u, 6u, 67u, 120u, 131u}) {
    std::vector<cdouble> in(n), out(n);
    for (auto& v : in) v = {rng.normal(), rng.normal()};
    FftPlan(n).transform(in, out);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<long double> acc = 0;
      for (std::size_t t = 0; t < n; ++t) {
        const long double a = -2.0L * 3.14159265358979323846264338327950288L * ((k * t) % n) / n;
        acc += std::complex<long double>(in[t].real(), in[t].imag()) * std::complex<long double>(std::cos(a), std::sin(a));
      }
      EXPECT_NEAR(out[k].real(), static_cast<double>(acc.real()), 1e-10) << n << ':' << k;
      EXPECT_NEAR(out[k].imag(), static_cast<double>(acc.imag()), 1e-10) << n << ':' << k;
    }
  }
}

TEST(Fft, ParsevalEvenLengths) {
  Rng rng(20);
  for (std::size_t n = 2; n <= 64; n += 2) {
    const auto x = random_signal(rng, n);
    const auto X = fft_real(std::span<const double>(x));
    double time = 0.0;
    for (double v : x) time += v * v;
    double freq = std::norm(X[0]) + std::norm(X[n / 2]);
    for (std::size_t k = 1; k < n / 2; ++k) freq += 2 * std::norm(X[k]);
    EXPECT_NEAR(freq / n, time, 1e-6 * time) << n;
  }
}

TEST(Fft, FloatOverloadAgreesWithDouble) {
  Rng rng(21);
  std::vector<float> xf(1000);
  for (auto& v : xf) v = static_cast<float>(rng.uniform(-1, 1));
  const std::vector<double> xd(xf.begin(), xf.end());
  const auto a = fft_real(std::span<const float>(xf));
  const auto b = fft_real(std::span<const double>(xd));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(Fft, PlanCacheReturnsSharedPlan) {
  EXPECT_EQ(real_fft_plan(300).get(), real_fft_plan(300).get());
  EXPECT_EQ(real_fft_plan(300)->bins(), 151u);
}

}  // namespace
}  // namespace maduv
