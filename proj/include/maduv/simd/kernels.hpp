#pragma once

// Data-parallel inner loops used by the STFT and the network layers.
//
// Every kernel has a scalar reference implementation; an AVX2/FMA variant is
// compiled into a separate translation unit and picked at runtime when the
// CPU supports it. Setting MADUV_SIMD=scalar in the environment forces the
// reference path.

#include <complex>
#include <cstddef>
#include <span>

namespace maduv::simd {

struct KernelTable {
  const char* name;
  // sum_i a[i] * b[i], float accumulation
  float (*dot)(const float* a, const float* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
  // sum_i x[i], double accumulation
  double (*sum)(const float* x, std::size_t n);
  // out[i] = |z[i]|^2
  void (*power_spectrum)(const std::complex<double>* z, float* out, std::size_t n);
  // out[i] = x[i] * w[i]
  void (*apply_window)(const float* x, const double* w, double* out, std::size_t n);
  // x[i] = max(x[i], 0)
  void (*relu)(float* x, std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2_fma();

/// Table chosen once per process from CPU features and MADUV_SIMD.
const KernelTable& active();

inline float dot(std::span<const float> a, std::span<const float> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum(std::span<const float> x) { return active().sum(x.data(), x.size()); }

}  // namespace maduv::simd
