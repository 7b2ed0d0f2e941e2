#include "maduv/fft.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "maduv/error.hpp"

namespace maduv {

namespace {

cdouble unit_root(std::size_t k, std::size_t n) {
  // e^{-2 pi i k / n} with k reduced mod n; the argument stays small for accuracy.
  const double phase = -2.0 * std::numbers::pi * static_cast<double>(k % n) / static_cast<double>(n);
  return {std::cos(phase), std::sin(phase)};
}

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> radices;
  while (n % 4 == 0) {
    radices.push_back(4);
    n /= 4;
  }
  while (n % 2 == 0) {
    radices.push_back(2);
    n /= 2;
  }
  for (std::size_t p = 3; p * p <= n; p += 2) {
    while (n % p == 0) {
      radices.push_back(p);
      n /= p;
    }
  }
  if (n > 1) radices.push_back(n);
  return radices;
}

}  // namespace

struct FftPlan::Bluestein {
  std::size_t m;
  std::vector<cdouble> chirp;         // e^{-i pi k^2 / n}, k < n
  std::vector<cdouble> kernel_fft;    // FFT of conj chirp, wrapped to length m
  std::unique_ptr<FftPlan> sub;
};

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw UsageError("FFT length must be positive");
  const auto radices = factorize(n);
  if (!radices.empty() && radices.back() > kMaxDirectRadix) {
    auto b = std::make_unique<Bluestein>();
    b->m = std::bit_ceil(2 * n - 1);
    b->chirp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2n keeps the phase argument exact for large k.
      const auto k2 = static_cast<unsigned __int128>(k) * k % (2 * n);
      const double phase = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
      b->chirp[k] = {std::cos(phase), std::sin(phase)};
    }
    b->sub = std::make_unique<FftPlan>(b->m);
    std::vector<cdouble> kernel(b->m, cdouble{});
    kernel[0] = std::conj(b->chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
      kernel[k] = std::conj(b->chirp[k]);
      kernel[b->m - k] = std::conj(b->chirp[k]);
    }
    b->kernel_fft.resize(b->m);
    b->sub->transform(kernel, b->kernel_fft);
    bluestein_ = std::move(b);
    return;
  }

  std::size_t remaining = n;
  for (std::size_t r : radices) {
    remaining /= r;
    stages_.push_back({r, remaining});
  }
  twiddles_.resize(n);
  for (std::size_t k = 0; k < n; ++k) twiddles_[k] = unit_root(k, n);
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::transform(std::span<const cdouble> in, std::span<cdouble> out) const {
  if (in.size() != n_ || out.size() != n_) throw UsageError("FFT buffer size mismatch");
  if (bluestein_) {
    const auto& b = *bluestein_;
    std::vector<cdouble> a(b.m, cdouble{});
    for (std::size_t k = 0; k < n_; ++k) a[k] = in[k] * b.chirp[k];
    std::vector<cdouble> fa(b.m);
    b.sub->transform(a, fa);
    for (std::size_t k = 0; k < b.m; ++k) fa[k] = std::conj(fa[k] * b.kernel_fft[k]);
    // Inverse transform via conjugation: ifft(x) = conj(fft(conj(x))) / m.
    b.sub->transform(fa, a);
    const double scale = 1.0 / static_cast<double>(b.m);
    for (std::size_t k = 0; k < n_; ++k) out[k] = std::conj(a[k]) * scale * b.chirp[k];
    return;
  }
  if (n_ == 1) {
    out[0] = in[0];
    return;
  }
  std::size_t max_radix = 0;
  for (const auto& s : stages_) max_radix = std::max(max_radix, s.radix);
  std::vector<cdouble> scratch(max_radix);
  if (in.data() == out.data()) {
    std::vector<cdouble> copy(in.begin(), in.end());
    work(out.data(), copy.data(), 1, 0, scratch.data());
  } else {
    work(out.data(), in.data(), 1, 0, scratch.data());
  }
}

void FftPlan::work(cdouble* out, const cdouble* in, std::size_t fstride, std::size_t stage,
                   cdouble* scratch) const {
  const std::size_t p = stages_[stage].radix;
  const std::size_t m = stages_[stage].remaining;
  if (m == 1) {
    for (std::size_t j = 0; j < p; ++j) out[j] = in[j * fstride];
  } else {
    for (std::size_t j = 0; j < p; ++j) {
      work(out + j * m, in + j * fstride, fstride * p, stage + 1, scratch);
    }
  }
  butterfly(out, fstride, p, m, scratch);
}

void FftPlan::butterfly(cdouble* out, std::size_t fstride, std::size_t radix, std::size_t m,
                        cdouble* scratch) const {
  const cdouble* tw = twiddles_.data();
  switch (radix) {
    case 2: {
      for (std::size_t u = 0; u < m; ++u) {
        const cdouble t = out[u + m] * tw[u * fstride];
        out[u + m] = out[u] - t;
        out[u] += t;
      }
      return;
    }
    case 4: {
      for (std::size_t u = 0; u < m; ++u) {
        const cdouble s0 = out[u + m] * tw[u * fstride];
        const cdouble s1 = out[u + 2 * m] * tw[2 * u * fstride];
        const cdouble s2 = out[u + 3 * m] * tw[3 * u * fstride];
        const cdouble s5 = out[u] - s1;
        const cdouble a = out[u] + s1;
        const cdouble s3 = s0 + s2;
        const cdouble s4 = s0 - s2;
        out[u + 2 * m] = a - s3;
        out[u] = a + s3;
        // forward transform: multiply s4 by -i
        out[u + m] = {s5.real() + s4.imag(), s5.imag() - s4.real()};
        out[u + 3 * m] = {s5.real() - s4.imag(), s5.imag() + s4.real()};
      }
      return;
    }
    case 3: {
      const double sin60 = -std::sqrt(3.0) / 2.0;  // imag part of e^{-2 pi i / 3}
      for (std::size_t u = 0; u < m; ++u) {
        const cdouble a1 = out[u + m] * tw[u * fstride];
        const cdouble a2 = out[u + 2 * m] * tw[2 * u * fstride];
        const cdouble sum = a1 + a2;
        const cdouble diff = a1 - a2;
        const cdouble x0 = out[u];
        const cdouble mid = x0 - 0.5 * sum;
        const cdouble rot{-diff.imag() * sin60, diff.real() * sin60};
        out[u] = x0 + sum;
        out[u + m] = mid + rot;
        out[u + 2 * m] = mid - rot;
      }
      return;
    }
    case 5: {
      const cdouble ya = tw[fstride * m];
      const cdouble yb = tw[2 * fstride * m];
      for (std::size_t u = 0; u < m; ++u) {
        const cdouble s0 = out[u];
        const cdouble s1 = out[u + m] * tw[u * fstride];
        const cdouble s2 = out[u + 2 * m] * tw[2 * u * fstride];
        const cdouble s3 = out[u + 3 * m] * tw[3 * u * fstride];
        const cdouble s4 = out[u + 4 * m] * tw[4 * u * fstride];
        const cdouble s7 = s1 + s4, s10 = s1 - s4, s8 = s2 + s3, s9 = s2 - s3;
        out[u] = s0 + s7 + s8;
        const cdouble s5{s0.real() + s7.real() * ya.real() + s8.real() * yb.real(),
                         s0.imag() + s7.imag() * ya.real() + s8.imag() * yb.real()};
        const cdouble s6{s10.imag() * ya.imag() + s9.imag() * yb.imag(),
                         -s10.real() * ya.imag() - s9.real() * yb.imag()};
        out[u + m] = s5 - s6;
        out[u + 4 * m] = s5 + s6;
        const cdouble s11{s0.real() + s7.real() * yb.real() + s8.real() * ya.real(),
                          s0.imag() + s7.imag() * yb.real() + s8.imag() * ya.real()};
        const cdouble s12{-s10.imag() * yb.imag() + s9.imag() * ya.imag(),
                          s10.real() * yb.imag() - s9.real() * ya.imag()};
        out[u + 2 * m] = s11 + s12;
        out[u + 3 * m] = s11 - s12;
      }
      return;
    }
    default: {
      // Generic odd radix: direct DFT of the p twiddled inputs.
      const std::size_t p = radix;
      for (std::size_t u = 0; u < m; ++u) {
        for (std::size_t q = 0; q < p; ++q) scratch[q] = out[u + q * m];
        for (std::size_t q1 = 0; q1 < p; ++q1) {
          const std::size_t k = u + q1 * m;
          cdouble acc = scratch[0];
          std::size_t twidx = 0;
          for (std::size_t q2 = 1; q2 < p; ++q2) {
            twidx += fstride * k;
            if (twidx >= n_) twidx %= n_;
            acc += scratch[q2] * tw[twidx];
          }
          out[k] = acc;
        }
      }
      return;
    }
  }
}

RealFft::RealFft(std::size_t n) : n_(n), plan_(n % 2 == 0 ? n / 2 : n) {
  if (n % 2 == 0) {
    const std::size_t half = n / 2;
    untangle_.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) untangle_[k] = unit_root(k, n);
  }
}

void RealFft::transform(std::span<const double> in, std::span<cdouble> out) const {
  if (in.size() != n_ || out.size() != bins()) throw UsageError("real FFT buffer size mismatch");
  if (n_ % 2 == 1) {
    std::vector<cdouble> z(in.begin(), in.end());
    std::vector<cdouble> spectrum(n_);
    plan_.transform(z, spectrum);
    std::copy_n(spectrum.begin(), bins(), out.begin());
    return;
  }
  const std::size_t half = n_ / 2;
  std::vector<cdouble> z(half);
  for (std::size_t t = 0; t < half; ++t) z[t] = {in[2 * t], in[2 * t + 1]};
  std::vector<cdouble> zf(half);
  plan_.transform(z, zf);
  for (std::size_t k = 0; k <= half; ++k) {
    const cdouble a = zf[k % half];
    const cdouble b = std::conj(zf[(half - k) % half]);
    const cdouble even = 0.5 * (a + b);
    const cdouble odd = cdouble{0.0, -0.5} * (a - b);
    out[k] = even + untangle_[k] * odd;
  }
}

std::shared_ptr<const RealFft> real_fft_plan(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const RealFft>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const RealFft>(n);
  return slot;
}

std::vector<cdouble> fft_real(std::span<const double> signal) {
  if (signal.empty()) throw UsageError("FFT of an empty signal");
  const auto plan = real_fft_plan(signal.size());
  std::vector<cdouble> out(plan->bins());
  plan->transform(signal, out);
  return out;
}

std::vector<cdouble> fft_real(std::span<const float> signal) {
  std::vector<double> widened(signal.begin(), signal.end());
  return fft_real(std::span<const double>(widened));
}

}  // namespace maduv
