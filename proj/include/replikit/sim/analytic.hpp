#pragma once

// Closed-form error probabilities of the naive "discovered here and somewhere else"
// approach under idealized configurations, and of BH-intersection for two studies.

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "replikit/error.hpp"
#include "replikit/stats/probability.hpp"
#include "replikit/stats/special.hpp"

namespace replikit::sim {

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
}

inline void check_counts(double m, double n) {
  if (!(m >= 1.0) || !(n >= 1.0)) throw InputError("m and n must be at least 1");
}

inline void check_proportions(const std::array<double, 4>& pi) {
  double s = 0.0;
  for (double v : pi) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("proportions must lie in [0,1]");
    s += v;
  }
  if (std::fabs(s - 1.0) > 1e-9) throw InputError("proportions must sum to 1");
}

// Probability that a null feature with U(0,1) p-values everywhere is discovered in study
// one and in at least one of the other n - 1 studies.
inline double g_null(double a, double n) { return a * (1.0 - std::pow(1.0 - a, n - 1.0)); }

}  // namespace detail

/// P(at least two of n uniform p-values are <= alpha).
inline Probability naive_binomial_bound(int n, double alpha) {
  detail::check_alpha(alpha);
  if (n < 2) throw InputError("n must be at least 2");
  return Probability::clamped(1.0 - std::pow(1.0 - alpha, n) -
                              n * std::pow(1.0 - alpha, n - 1) * alpha);
}

/// Same event when one study is known to produce p = 0.
inline Probability naive_single_strong_bound(int n, double alpha) {
  detail::check_alpha(alpha);
  if (n < 2) throw InputError("n must be at least 2");
  return Probability::clamped(1.0 - std::pow(1.0 - alpha, n - 1));
}

/// One feature with signal only in study one, one with signal everywhere, m - 2 nulls;
/// Bonferroni per study.
inline Probability analytic_example2(double m, double n, double alpha) {
  detail::check_alpha(alpha);
  detail::check_counts(m, n);
  const double a = alpha / m;
  return Probability::clamped(1.0 - std::pow(1.0 - a, n - 1.0) *
                                        std::pow(1.0 - detail::g_null(a, n), m - 2.0));
}

struct Example3Result {
  double u1 = 0.0;
  double u2 = 0.0;
  double fdr = 0.0;
};

/// BH at level alpha in each of two studies with point-mass effects and no shared signal.
inline Example3Result analytic_example3(double pi00, double pi10, double pi01, double alpha, double m,
                                        double pi11 = 0.0) {
  detail::check_alpha(alpha);
  if (pi11 != 0.0) throw InputError("this configuration requires no features with signal in both studies");
  if (!(pi00 >= 0.0 && pi10 > 0.0 && pi01 > 0.0) || std::fabs(pi00 + pi10 + pi01 - 1.0) > 1e-9) {
    throw InputError("proportions must be non-negative, with positive single-study shares, summing to 1");
  }
  if (!(m >= 1.0)) throw InputError("m must be at least 1");
  const double beta1 = (1.0 - alpha * (pi00 + pi01)) / (alpha * (1.0 - pi00 - pi01));
  const double beta2 = (1.0 - alpha * (pi00 + pi10)) / (alpha * (1.0 - pi00 - pi10));
  Example3Result out;
  out.u1 = 1.0 / beta1;
  out.u2 = 1.0 / beta2;
  // Point-mass effects: F_j(u) = 1.
  out.fdr = 1.0 - std::pow(1.0 - out.u1 * out.u2, m * pi00) * std::pow(1.0 - out.u2, m * pi10) *
                      std::pow(1.0 - out.u1, m * pi01);
  return out;
}

enum class AppendixExample { kA1, kA2, kA3, kA3Approx, kA4Exact, kA4Approx, kA5, kA6, kA6Pairwise };

inline AppendixExample parse_appendix_example(std::string_view id) {
  if (id == "A1") return AppendixExample::kA1;
  if (id == "A2") return AppendixExample::kA2;
  if (id == "A3") return AppendixExample::kA3;
  if (id == "A3_approx") return AppendixExample::kA3Approx;
  if (id == "A4_exact") return AppendixExample::kA4Exact;
  if (id == "A4_approx") return AppendixExample::kA4Approx;
  if (id == "A5") return AppendixExample::kA5;
  if (id == "A6") return AppendixExample::kA6;
  if (id == "A6_pairwise") return AppendixExample::kA6Pairwise;
  throw InputError("unknown example id '" + std::string(id) + "'");
}

struct AppendixParams {
  double m = 100;
  double n = 10;
  double alpha = 0.05;
  // Shares of the four configurations: signal only in study one, signal only in study
  // two, signal everywhere, no signal. Empty (all zero) means the single-feature layout.
  std::array<double, 4> pi{0.0, 0.0, 0.0, 0.0};
  // Normal shift for non-null p-values in A5; effects are point masses elsewhere.
  double mu = 2.0;

  bool proportional() const { return pi[0] + pi[1] + pi[2] + pi[3] > 0.0; }
};

/// Probability that the per-study Bonferroni decision on a shifted-normal p-value
/// rejects at level a.
inline double normal_effect_power(double a, double mu) {
  return stats::normal_sf(stats::normal_quantile(1.0 - a) - mu);
}

inline Probability analytic_appendix(AppendixExample id, const AppendixParams& p) {
  detail::check_alpha(p.alpha);
  const double alpha = p.alpha;
  switch (id) {
    case AppendixExample::kA1:
      return Probability::clamped(1.0 - (1.0 - alpha) * (1.0 - alpha));
    case AppendixExample::kA2: {
      if (!(p.n >= 2.0)) throw InputError("n must be at least 2");
      const double f = alpha / 2.0 + alpha * alpha / 4.0;
      return Probability::clamped(1.0 - (1.0 - alpha) * (1.0 - alpha) * std::pow(1.0 - f, p.n - 2.0));
    }
    case AppendixExample::kA3: {
      detail::check_counts(p.m, p.n);
      const double a = alpha / p.m;
      return Probability::clamped(1.0 - std::pow(1.0 - a, p.n) *
                                            std::pow(1.0 - detail::g_null(a, p.n), p.m - 3.0));
    }
    case AppendixExample::kA3Approx:
      return Probability::clamped(1.0 - std::exp(-alpha * (2.0 - std::exp(-alpha))));
    case AppendixExample::kA4Exact: {
      detail::check_counts(p.m, p.n);
      detail::check_proportions(p.pi);
      const double a = alpha / p.m;
      const double keep = std::pow(1.0 - a, (p.n - 1.0) * p.m * p.pi[0]) * std::pow(1.0 - a, p.m * p.pi[1]) *
                          std::pow(1.0 - detail::g_null(a, p.n), p.m * p.pi[3]);
      return Probability::clamped(1.0 - keep);
    }
    case AppendixExample::kA4Approx: {
      detail::check_proportions(p.pi);
      return Probability::clamped(1.0 - std::exp(-alpha * ((p.n - 1.0) * p.pi[0] + p.pi[1])));
    }
    case AppendixExample::kA5: {
      detail::check_counts(p.m, p.n);
      const double a = alpha / p.m;
      const double f = normal_effect_power(a, p.mu);
      const double g1 = 1.0 - std::pow(1.0 - a, p.n - 1.0);
      const double g2 = a;
      const double claim1 = f * g1;
      const double claim2 = g2 * (1.0 - (1.0 - f) * std::pow(1.0 - a, p.n - 2.0));
      const double claim_null = detail::g_null(a, p.n);
      double e1 = 1.0, e2 = 1.0, e4 = p.m - 3.0;
      if (p.proportional()) {
        detail::check_proportions(p.pi);
        e1 = p.m * p.pi[0];
        e2 = p.m * p.pi[1];
        e4 = p.m * p.pi[3];
      }
      return Probability::clamped(1.0 - std::pow(1.0 - claim1, e1) * std::pow(1.0 - claim2, e2) *
                                            std::pow(1.0 - claim_null, e4));
    }
    case AppendixExample::kA6: {
      detail::check_counts(p.m, p.n);
      const double a = alpha / p.m;
      return Probability::clamped(1.0 - std::pow(1.0 - detail::g_null(a, p.n), p.m));
    }
    case AppendixExample::kA6Pairwise: {
      // Per-feature probability of discoveries in at least two of the n studies.
      detail::check_counts(p.m, p.n);
      const double a = alpha / p.m;
      return Probability::clamped(1.0 - (std::pow(1.0 - a, p.n) + p.n * std::pow(1.0 - a, p.n - 1.0) * a));
    }
  }
  throw InputError("unknown example id");
}

}  // namespace replikit::sim
