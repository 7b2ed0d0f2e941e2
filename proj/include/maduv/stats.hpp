#pragma once

#include <cstddef>
#include <span>

namespace maduv {

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
/// Continued fraction (modified Lentz) with the symmetry swap for x > (a+1)/(a+b+2).
double regularized_incomplete_beta(double a, double b, double x);

/// P(T > t) for Student's t with df degrees of freedom.
double student_t_upper_tail(double t, double df);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample std (n - 1); 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct TTestResult {
  double t = 0.0;
  double p = 0.0;  // upper-tail: P(T_{df} > t)
  double df = 0.0;
};

/// H1: mean > mu0. Throws DataError for n < 2 or zero variance.
TTestResult t_test_one_sample_one_tailed(std::span<const double> values, double mu0 = 0.5);

/// Same test from published aggregates (mean, sample std, n).
TTestResult t_test_from_summary(double mean, double std, std::size_t n, double mu0 = 0.5);

/// One-sample test of the per-index differences a - b against 0 (H1: a > b).
TTestResult t_test_paired_one_tailed(std::span<const double> a, std::span<const double> b);

}  // namespace maduv
