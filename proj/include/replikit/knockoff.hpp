#pragma once

// Replicability filter for multi-environment knockoff statistics. Rows of W are features,
// columns are environments; null entries are sign-symmetric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "replikit/base_mt.hpp"
#include "replikit/error.hpp"
#include "replikit/matrix.hpp"
#include "replikit/pvalue_core.hpp"
#include "replikit/stats/rng.hpp"
#include "replikit/stats/special.hpp"

namespace replikit {

using KnockoffMatrix = Matrix<double>;

struct SignCounts {
  int negative = 0;
  int zero = 0;
};

inline SignCounts sign_counts(std::span<const double> w) {
  SignCounts c;
  for (double v : w) {
    if (v < 0.0) ++c.negative;
    else if (v == 0.0) ++c.zero;
  }
  return c;
}

/// Randomized binomial PC p-value from the sign pattern of one row.
inline Probability knockoff_pc_pvalue(std::span<const double> w, int r, double u) {
  detail::check_r(r, w.size());
  if (!(u >= 0.0 && u <= 1.0)) throw InputError("auxiliary uniform must lie in [0,1]");
  const auto c = sign_counts(w);
  const long trials = std::max(static_cast<long>(w.size()) - r + 1 - c.zero, 0L);
  const double below = stats::binomial_cdf(c.negative - 1, trials, 0.5);
  const double at = stats::binomial_pmf(c.negative, trials, 0.5);
  return Probability::clamped(std::min(1.0, below + u * at));
}

/// Two-valued p-value for r = n: 1/2 when every entry is strictly positive, else 1.
inline Probability knockoff_pc_pvalue_nn(std::span<const double> w) {
  if (w.empty()) throw InputError("knockoff row is empty");
  const bool all_positive = std::all_of(w.begin(), w.end(), [](double v) { return v > 0.0; });
  return Probability(all_positive ? 0.5 : 1.0);
}

/// Product of the r largest absolute values.
inline double w_r_magnitude(std::span<const double> w, int r) {
  detail::check_r(r, w.size());
  std::vector<double> a(w.size());
  std::transform(w.begin(), w.end(), a.begin(), [](double v) { return std::fabs(v); });
  std::partial_sort(a.begin(), a.begin() + r, a.end(), std::greater<>());
  double prod = 1.0;
  for (int k = 0; k < r; ++k) prod *= a[k];
  return prod;
}

struct SeqStepResult {
  std::vector<std::size_t> rejected;  // ascending
  double threshold = std::numeric_limits<double>::infinity();
};

/// Selective SeqStep+ on importance magnitudes: smallest w whose estimated false
/// discovery proportion among {|W| >= w} is within the bound.
inline SeqStepResult seqstep_filter(std::span<const double> magnitudes, std::span<const double> pvalues,
                                    double c, double alpha) {
  if (magnitudes.size() != pvalues.size()) throw InputError("magnitude and p-value counts differ");
  if (!(c > 0.0 && c < 1.0)) throw InputError("c must lie in (0,1)");
  detail::check_alpha(alpha);
  const double bound = (1.0 - c) / c * alpha;
  const std::size_t m = magnitudes.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return magnitudes[a] > magnitudes[b]; });

  SeqStepResult out;
  std::size_t big = 0;    // #{|W| >= w, p > c}
  std::size_t small = 0;  // #{|W| >= w, p <= c}
  std::size_t k = 0;
  while (k < m) {
    const double w = magnitudes[order[k]];
    while (k < m && magnitudes[order[k]] == w) {
      (pvalues[order[k]] <= c ? small : big) += 1;
      ++k;
    }
    const double ratio = (1.0 + static_cast<double>(big)) / static_cast<double>(std::max<std::size_t>(small, 1));
    if (ratio <= bound) out.threshold = w;  // scanning downward, so the last hit is the minimum
  }
  if (out.threshold == std::numeric_limits<double>::infinity()) return out;
  for (std::size_t i = 0; i < m; ++i) {
    if (magnitudes[i] >= out.threshold && pvalues[i] <= c) out.rejected.push_back(i);
  }
  return out;
}

struct KnockoffConfig {
  int r = 2;
  double alpha = 0.1;
  double c = 0.5;  // forced to 1/2 when r = n
};

struct KnockoffReport {
  std::vector<double> pvalues;
  std::vector<double> magnitudes;
  std::vector<std::size_t> rejected;
  double threshold = std::numeric_limits<double>::infinity();
  double c_used = 0.5;
};

/// Full filter. One uniform per feature is drawn from `rng` in feature order.
inline KnockoffReport knockoff_filter(const KnockoffMatrix& w, const KnockoffConfig& cfg,
                                      stats::RngStream& rng) {
  detail::check_r(cfg.r, w.cols());
  KnockoffReport rep;
  const bool full = static_cast<std::size_t>(cfg.r) == w.cols();
  rep.c_used = full ? 0.5 : cfg.c;
  rep.pvalues.resize(w.rows());
  rep.magnitudes.resize(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double u = rng.uniform();
    rep.pvalues[i] = full ? knockoff_pc_pvalue_nn(w.row(i)).value()
                          : knockoff_pc_pvalue(w.row(i), cfg.r, u).value();
    rep.magnitudes[i] = w_r_magnitude(w.row(i), cfg.r);
  }
  auto step = seqstep_filter(rep.magnitudes, rep.pvalues, rep.c_used, cfg.alpha);
  rep.rejected = std::move(step.rejected);
  rep.threshold = step.threshold;
  return rep;
}

}  // namespace replikit
