#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace maduv {

using cdouble = std::complex<double>;

/// Forward complex DFT of arbitrary length, X[k] = sum_t x[t] e^{-2 pi i k t / n}.
///
/// Mixed-radix Cooley-Tukey over the factors of n (radix 4, 2, 3, 5 butterflies
/// plus a generic odd-prime butterfly). Lengths with a prime factor above
/// kMaxDirectRadix are computed with Bluestein's chirp-z algorithm. A plan is
/// immutable after construction; transform() may be called concurrently.
class FftPlan {
 public:
  static constexpr std::size_t kMaxDirectRadix = 61;

  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;

  std::size_t size() const noexcept { return n_; }
  void transform(std::span<const cdouble> in, std::span<cdouble> out) const;

 private:
  struct Stage {
    std::size_t radix;
    std::size_t remaining;  // n / (product of radices up to and including this stage)
  };
  struct Bluestein;

  void work(cdouble* out, const cdouble* in, std::size_t fstride, std::size_t stage,
            cdouble* scratch) const;
  void butterfly(cdouble* out, std::size_t fstride, std::size_t radix, std::size_t m,
                 cdouble* scratch) const;

  std::size_t n_ = 0;
  std::vector<Stage> stages_;
  std::vector<cdouble> twiddles_;
  std::unique_ptr<Bluestein> bluestein_;
};

/// Half spectrum of a real signal: X[0..n/2]. Even lengths are packed into a
/// complex transform of length n/2.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }
  void transform(std::span<const double> in, std::span<cdouble> out) const;

 private:
  std::size_t n_;
  FftPlan plan_;  // length n/2 when n is even, n otherwise
  std::vector<cdouble> untangle_;
};

/// Shared, cached plan for length n.
std::shared_ptr<const RealFft> real_fft_plan(std::size_t n);

std::vector<cdouble> fft_real(std::span<const float> signal);
std::vector<cdouble> fft_real(std::span<const double> signal);

}  // namespace maduv
