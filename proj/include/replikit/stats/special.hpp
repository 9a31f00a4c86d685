#pragma once

// Special functions: chi-square and normal tails, normal quantile, binomial law.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "replikit/error.hpp"
#include "replikit/stats/probability.hpp"

namespace replikit::stats {

namespace detail {

inline constexpr double kEps = 1e-16;
inline constexpr int kMaxIter = 10000;

// Regularized lower incomplete gamma P(a, x) by its power series; use for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  double ap = a;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued fraction; x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Q(a, x) = Gamma(a, x) / Gamma(a).
inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (a == 1.0) return std::exp(-x);
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

/// Upper tail P(chi^2_df >= x).
inline Probability chi_square_sf(double x, int df) {
  if (df <= 0) throw InputError("chi_square_sf: degrees of freedom must be positive");
  if (!(x >= 0.0)) throw InputError("chi_square_sf: statistic must be non-negative");
  if (std::isinf(x)) return Probability(0.0);
  return Probability::clamped(gamma_q(0.5 * df, 0.5 * x));
}

inline Probability normal_cdf(double z) {
  return Probability::clamped(0.5 * std::erfc(-z / std::sqrt(2.0)));
}

// Upper tail 1 - Phi(z), accurate for large z.
inline Probability normal_sf(double z) {
  return Probability::clamped(0.5 * std::erfc(z / std::sqrt(2.0)));
}

inline double normal_pdf(double z) {
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

/// Inverse of normal_cdf. Acklam's rational approximation followed by one Halley step.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InputError("normal_quantile: p must lie strictly inside (0,1), got " + std::to_string(p));
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement; the residual is taken on the smaller tail to keep precision.
  const double e = (x < 0.0) ? (0.5 * std::erfc(-x / std::sqrt(2.0)) - p)
                             : ((1.0 - p) - 0.5 * std::erfc(x / std::sqrt(2.0)));
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

/// Binomial probability mass P(X = k), X ~ Bin(trials, prob).
inline double binomial_pmf(long k, long trials, double prob) {
  if (trials < 0) throw InputError("binomial: trials must be non-negative");
  if (!(prob >= 0.0 && prob <= 1.0)) throw InputError("binomial: prob must lie in [0,1]");
  if (k < 0 || k > trials) return 0.0;
  if (prob == 0.0) return k == 0 ? 1.0 : 0.0;
  if (prob == 1.0) return k == trials ? 1.0 : 0.0;
  const double log_choose = std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) -
                            std::lgamma(static_cast<double>(trials - k) + 1.0);
  return std::exp(log_choose + k * std::log(prob) + (trials - k) * std::log1p(-prob));
}

/// P(X <= k) by direct summation of mass terms.
inline Probability binomial_cdf(long k, long trials, double prob) {
  if (trials < 0) throw InputError("binomial: trials must be non-negative");
  if (!(prob >= 0.0 && prob <= 1.0)) throw InputError("binomial: prob must lie in [0,1]");
  if (k < 0) return Probability(0.0);
  if (k >= trials) return Probability(1.0);
  double sum = 0.0;
  for (long i = 0; i <= k; ++i) sum += binomial_pmf(i, trials, prob);
  return Probability::clamped(sum);
}

}  // namespace replikit::stats
