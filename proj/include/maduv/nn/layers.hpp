#pragma once

// Per-layer forward and hand-derived backward passes. Templated on the scalar
// type so float64 shadow models can be finite-difference checked; the float
// instantiation runs on the SIMD kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "maduv/error.hpp"
#include "maduv/simd/kernels.hpp"

namespace maduv::nn {

namespace detail {

template <class T>
inline T dot(const T* a, const T* b, std::size_t n) {
  T acc{};
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}
template <>
inline float dot<float>(const float* a, const float* b, std::size_t n) {
  return simd::active().dot(a, b, n);
}

template <class T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}
template <>
inline void axpy<float>(float alpha, const float* x, float* y, std::size_t n) {
  simd::active().axpy(alpha, x, y, n);
}

template <class T>
inline T sum(const T* x, std::size_t n) {
  T acc{};
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace detail

struct ConvShape {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t height;
  std::size_t width;
  std::size_t kernel;  // odd; "same" zero padding of kernel / 2

  std::size_t pad() const { return kernel / 2; }
  std::size_t col_rows() const { return in_channels * kernel * kernel; }
  std::size_t plane() const { return height * width; }
};

inline constexpr std::size_t kConvTile = 512;

/// col[(c*k + ky)*k + kx][y*W + x] = in[c][y + ky - pad][x + kx - pad], zero outside.
template <class T>
void im2col(std::span<const T> in, const ConvShape& s, std::span<T> col) {
  const std::size_t k = s.kernel, pad = s.pad(), h = s.height, w = s.width;
  for (std::size_t c = 0; c < s.in_channels; ++c) {
    const T* plane = in.data() + c * h * w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* row = col.data() + ((c * k + ky) * k + kx) * h * w;
        for (std::size_t y = 0; y < h; ++y) {
          const auto sy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(pad);
          T* dst = row + y * w;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) {
            std::fill(dst, dst + w, T{});
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(sy) * w;
          for (std::size_t x = 0; x < w; ++x) {
            const auto sx = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pad);
            dst[x] = (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) ? T{} : src[sx];
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: accumulates col back into din.
template <class T>
void col2im(std::span<const T> col, const ConvShape& s, std::span<T> din) {
  const std::size_t k = s.kernel, pad = s.pad(), h = s.height, w = s.width;
  for (std::size_t c = 0; c < s.in_channels; ++c) {
    T* plane = din.data() + c * h * w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* row = col.data() + ((c * k + ky) * k + kx) * h * w;
        for (std::size_t y = 0; y < h; ++y) {
          const auto sy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(pad);
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          T* dst = plane + static_cast<std::size_t>(sy) * w;
          const T* src = row + y * w;
          for (std::size_t x = 0; x < w; ++x) {
            const auto sx = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pad);
            if (sx >= 0 && sx < static_cast<std::ptrdiff_t>(w)) dst[sx] += src[x];
          }
        }
      }
    }
  }
}

/// out[co] = bias[co] + sum_r weight[co][r] * col[r]; col is scratch of col_rows x plane.
template <class T>
void conv2d_forward(std::span<const T> in, const ConvShape& s, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> out, std::vector<T>& col) {
  const std::size_t rows = s.col_rows(), plane = s.plane();
  col.resize(rows * plane);
  im2col<T>(in, s, col);
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    std::fill(out.data() + co * plane, out.data() + (co + 1) * plane, bias[co]);
  }
  // Column tiles keep the im2col slice cache-resident across output channels.
  for (std::size_t p0 = 0; p0 < plane; p0 += kConvTile) {
    const std::size_t n = std::min(kConvTile, plane - p0);
    for (std::size_t co = 0; co < s.out_channels; ++co) {
      T* dst = out.data() + co * plane + p0;
      const T* wrow = weight.data() + co * rows;
      for (std::size_t r = 0; r < rows; ++r) detail::axpy(wrow[r], col.data() + r * plane + p0, dst, n);
    }
  }
}

/// Accumulates dweight/dbias; overwrites din when it is non-empty.
template <class T>
void conv2d_backward(std::span<const T> in, const ConvShape& s, std::span<const T> weight,
                     std::span<const T> dout, std::span<T> dweight, std::span<T> dbias, std::span<T> din,
                     std::vector<T>& col) {
  const std::size_t rows = s.col_rows(), plane = s.plane();
  col.resize(rows * plane);
  im2col<T>(in, s, col);
  for (std::size_t co = 0; co < s.out_channels; ++co) dbias[co] += detail::sum(dout.data() + co * plane, plane);
  for (std::size_t p0 = 0; p0 < plane; p0 += kConvTile) {
    const std::size_t n = std::min(kConvTile, plane - p0);
    for (std::size_t co = 0; co < s.out_channels; ++co) {
      const T* g = dout.data() + co * plane + p0;
      T* dw = dweight.data() + co * rows;
      for (std::size_t r = 0; r < rows; ++r) dw[r] += detail::dot(g, col.data() + r * plane + p0, n);
    }
  }
  if (din.empty()) return;
  std::fill(col.begin(), col.end(), T{});
  for (std::size_t p0 = 0; p0 < plane; p0 += kConvTile) {
    const std::size_t n = std::min(kConvTile, plane - p0);
    for (std::size_t co = 0; co < s.out_channels; ++co) {
      const T* g = dout.data() + co * plane + p0;
      const T* wrow = weight.data() + co * rows;
      for (std::size_t r = 0; r < rows; ++r) detail::axpy(wrow[r], g, col.data() + r * plane + p0, n);
    }
  }
  std::fill(din.begin(), din.end(), T{});
  col2im<T>(col, s, din);
}

template <class T>
void relu_forward(std::span<T> x) {
  for (T& v : x) v = v > T{} ? v : T{};
}
template <>
inline void relu_forward<float>(std::span<float> x) {
  simd::active().relu(x.data(), x.size());
}

/// Masks the gradient by the (post-ReLU) activations.
template <class T>
void relu_backward(std::span<const T> activated, std::span<T> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activated[i] > T{})) grad[i] = T{};
  }
}

struct PoolShape {
  std::size_t channels;
  std::size_t height;
  std::size_t width;
  std::size_t pool;

  std::size_t out_height() const { return height / pool; }  // floor: trailing rows dropped
  std::size_t out_width() const { return width / pool; }
  std::size_t out_size() const { return channels * out_height() * out_width(); }
};

/// Non-overlapping max pooling; argmax records the flat input index of each max (first wins).
template <class T>
void maxpool2d_forward(std::span<const T> in, const PoolShape& s, std::span<T> out,
                       std::span<std::uint32_t> argmax) {
  const std::size_t oh = s.out_height(), ow = s.out_width();
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        std::size_t best = (c * s.height + y * s.pool) * s.width + x * s.pool;
        for (std::size_t dy = 0; dy < s.pool; ++dy) {
          for (std::size_t dx = 0; dx < s.pool; ++dx) {
            const std::size_t idx = (c * s.height + y * s.pool + dy) * s.width + x * s.pool + dx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (c * oh + y) * ow + x;
        out[o] = in[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

template <class T>
void maxpool2d_backward(std::span<const T> dout, std::span<const std::uint32_t> argmax, std::span<T> din) {
  std::fill(din.begin(), din.end(), T{});
  for (std::size_t o = 0; o < dout.size(); ++o) din[argmax[o]] += dout[o];
}

/// out[j] = bias[j] + weight[j] . in, weight is [n_out x n_in].
template <class T>
void linear_forward(std::span<const T> in, std::span<const T> weight, std::span<const T> bias,
                    std::span<T> out) {
  const std::size_t n_in = in.size();
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = bias[j] + detail::dot(weight.data() + j * n_in, in.data(), n_in);
  }
}

/// Accumulates dweight/dbias; overwrites din when it is non-empty.
template <class T>
void linear_backward(std::span<const T> in, std::span<const T> weight, std::span<const T> dout,
                     std::span<T> dweight, std::span<T> dbias, std::span<T> din) {
  const std::size_t n_in = in.size();
  for (std::size_t j = 0; j < dout.size(); ++j) {
    dbias[j] += dout[j];
    if (dout[j] != T{}) detail::axpy(dout[j], in.data(), dweight.data() + j * n_in, n_in);
  }
  if (din.empty()) return;
  std::fill(din.begin(), din.end(), T{});
  for (std::size_t j = 0; j < dout.size(); ++j) {
    if (dout[j] != T{}) detail::axpy(dout[j], weight.data() + j * n_in, din.data(), n_in);
  }
}

template <class T>
T sigmoid(T z) {
  if (z >= T{}) return T{1} / (T{1} + std::exp(-z));
  const T e = std::exp(z);
  return e / (T{1} + e);
}

/// Mean binary cross-entropy on logits, in the log-sum-exp form
/// max(z, 0) - z*y + log1p(exp(-|z|)). Labels must be 0 or 1.
template <class T>
double bce_with_logits(std::span<const T> logits, std::span<const T> labels) {
  if (logits.size() != labels.size() || logits.empty()) throw UsageError("BCE: size mismatch or empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double y = static_cast<double>(labels[i]);
    if (y != 0.0 && y != 1.0) throw DataError("BCE label outside {0,1}");
    const double z = static_cast<double>(logits[i]);
    total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
  }
  return total / static_cast<double>(logits.size());
}

}  // namespace maduv::nn
