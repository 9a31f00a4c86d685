#pragma once

// Single-family multiple testing: Bonferroni, Holm, Hochberg, Benjamini-Hochberg, and the
// Storey null-proportion estimate. Rejection uses non-strict comparisons throughout.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "replikit/error.hpp"

namespace replikit {

struct MtResult {
  std::vector<std::size_t> rejected;  // ascending indices
  std::vector<double> adjusted;       // capped at 1
  double threshold_used = 0.0;        // p-value cutoff actually applied
};

enum class MtProcedure { kBonferroni, kHolm, kHochberg, kBh };

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
}

// Indices ordered by (p, index).
inline std::vector<std::size_t> order_by_pvalue(std::span<const double> p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  return order;
}

inline std::vector<std::size_t> leq_threshold(std::span<const double> p, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= threshold) out.push_back(i);
  }
  return out;
}

}  // namespace detail

inline MtResult bonferroni(std::span<const double> p, double alpha) {
  detail::check_alpha(alpha);
  MtResult out;
  const auto m = static_cast<double>(p.size());
  if (p.empty()) return out;
  out.threshold_used = alpha / m;
  out.rejected = detail::leq_threshold(p, out.threshold_used);
  out.adjusted.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out.adjusted[i] = std::min(1.0, m * p[i]);
  return out;
}

inline MtResult holm(std::span<const double> p, double alpha) {
  detail::check_alpha(alpha);
  MtResult out;
  const std::size_t m = p.size();
  if (m == 0) return out;
  const auto order = detail::order_by_pvalue(p);
  std::size_t passed = 0;
  while (passed < m && p[order[passed]] <= alpha / static_cast<double>(m - passed)) ++passed;
  out.threshold_used = passed < m ? alpha / static_cast<double>(m - passed) : alpha;
  for (std::size_t k = 0; k < passed; ++k) out.rejected.push_back(order[k]);
  std::sort(out.rejected.begin(), out.rejected.end());

  out.adjusted.resize(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    running = std::max(running, static_cast<double>(m - k) * p[order[k]]);
    out.adjusted[order[k]] = std::min(1.0, running);
  }
  return out;
}

inline MtResult hochberg(std::span<const double> p, double alpha) {
  detail::check_alpha(alpha);
  MtResult out;
  const std::size_t m = p.size();
  if (m == 0) return out;
  const auto order = detail::order_by_pvalue(p);
  std::size_t count = 0;  // largest k (1-based) with p_(k) <= alpha / (m - k + 1)
  for (std::size_t k = m; k >= 1; --k) {
    if (p[order[k - 1]] <= alpha / static_cast<double>(m - k + 1)) {
      count = k;
      break;
    }
  }
  out.threshold_used = count > 0 ? alpha / static_cast<double>(m - count + 1) : alpha / m;
  for (std::size_t k = 0; k < count; ++k) out.rejected.push_back(order[k]);
  std::sort(out.rejected.begin(), out.rejected.end());

  out.adjusted.resize(m);
  double running = 1.0;
  for (std::size_t k = m; k >= 1; --k) {
    running = std::min(running, static_cast<double>(m - k + 1) * p[order[k - 1]]);
    out.adjusted[order[k - 1]] = std::min(1.0, running);
  }
  return out;
}

/// Benjamini-Hochberg step-up.
inline MtResult bh(std::span<const double> p, double alpha) {
  detail::check_alpha(alpha);
  MtResult out;
  const std::size_t m = p.size();
  if (m == 0) return out;
  const auto order = detail::order_by_pvalue(p);
  std::size_t count = 0;
  for (std::size_t k = m; k >= 1; --k) {
    if (p[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) {
      count = k;
      break;
    }
  }
  out.threshold_used = static_cast<double>(count) * alpha / static_cast<double>(m);
  for (std::size_t k = 0; k < count; ++k) out.rejected.push_back(order[k]);
  std::sort(out.rejected.begin(), out.rejected.end());

  out.adjusted.resize(m);
  double running = 1.0;
  for (std::size_t k = m; k >= 1; --k) {
    running = std::min(running, static_cast<double>(m) * p[order[k - 1]] / static_cast<double>(k));
    out.adjusted[order[k - 1]] = std::min(1.0, running);
  }
  return out;
}

inline MtResult run_procedure(MtProcedure proc, std::span<const double> p, double alpha) {
  switch (proc) {
    case MtProcedure::kBonferroni: return bonferroni(p, alpha);
    case MtProcedure::kHolm: return holm(p, alpha);
    case MtProcedure::kHochberg: return hochberg(p, alpha);
    case MtProcedure::kBh: return bh(p, alpha);
  }
  throw InputError("unknown multiple-testing procedure");
}

inline MtProcedure parse_procedure(std::string_view name) {
  if (name == "bonferroni") return MtProcedure::kBonferroni;
  if (name == "holm") return MtProcedure::kHolm;
  if (name == "hochberg") return MtProcedure::kHochberg;
  if (name == "bh") return MtProcedure::kBh;
  throw InputError("unknown procedure '" + std::string(name) + "'");
}

/// Storey's estimate of the null proportion, min(1, #{p > lambda} / ((1 - lambda) m)).
inline double storey_pi0(std::span<const double> p, double lambda = 0.5) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("lambda must lie in (0,1)");
  if (p.empty()) return 1.0;
  const auto above = std::count_if(p.begin(), p.end(), [&](double v) { return v > lambda; });
  return std::min(1.0, static_cast<double>(above) / ((1.0 - lambda) * static_cast<double>(p.size())));
}

}  // namespace replikit
