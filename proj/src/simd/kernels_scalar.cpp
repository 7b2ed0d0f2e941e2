#include "maduv/simd/kernels.hpp"

namespace maduv::simd {
namespace {

float dot_scalar(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_scalar(const float* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void power_spectrum_scalar(const std::complex<double>* z, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real();
    const double im = z[i].imag();
    out[i] = static_cast<float>(re * re + im * im);
  }
}

void apply_window_scalar(const float* x, const double* w, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(x[i]) * w[i];
}

void relu_scalar(float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",         dot_scalar,          axpy_scalar, sum_scalar,
                                 power_spectrum_scalar, apply_window_scalar, relu_scalar};
  return table;
}

}  // namespace maduv::simd
