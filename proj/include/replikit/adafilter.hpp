#pragma once

// AdaFilter Bonferroni and AdaFilter BH for r/n replicability. Features are filtered by
// F_i = (n-r+1) p_(r-1) and tested by S_i = (n-r+1) p_(r). Unlike the cross-screening
// procedures, every comparison here is strict.

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "replikit/base_mt.hpp"
#include "replikit/cross_screen.hpp"
#include "replikit/error.hpp"
#include "replikit/matrix.hpp"
#include "replikit/pvalue_core.hpp"

namespace replikit {

struct AdaFilterStats {
  std::vector<double> filter;     // F_i, uncapped
  std::vector<double> selection;  // S_i, uncapped
  int r = 1;
  int n = 0;

  std::size_t size() const { return selection.size(); }
};

enum class AdaFilterVariant { kBonferroni, kBh };

inline AdaFilterVariant parse_adafilter_variant(std::string_view name) {
  if (name == "bonferroni") return AdaFilterVariant::kBonferroni;
  if (name == "bh") return AdaFilterVariant::kBh;
  throw InputError("unknown AdaFilter variant '" + std::string(name) + "'");
}

inline AdaFilterStats adafilter_stats(const PValueMatrix& p, int r) {
  detail::check_r(r, p.cols());
  AdaFilterStats st;
  st.r = r;
  st.n = static_cast<int>(p.cols());
  st.filter.resize(p.rows());
  st.selection.resize(p.rows());
  const double factor = static_cast<double>(st.n - r + 1);
  std::vector<double> row;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    row.assign(p.row(i).begin(), p.row(i).end());
    std::sort(row.begin(), row.end());
    st.filter[i] = r == 1 ? 0.0 : factor * row[r - 2];
    st.selection[i] = factor * row[r - 1];
  }
  return st;
}

/// Supremum of the feasible gamma in [0, alpha]. Both counts are constant on each interval
/// between consecutive data values, so each interval is solved in closed form.
inline double adafilter_gamma0(const AdaFilterStats& st, double alpha, AdaFilterVariant variant) {
  detail::check_alpha(alpha);
  std::vector<double> breaks{0.0, alpha};
  for (double f : st.filter) {
    if (f > 0.0 && f < alpha) breaks.push_back(f);
  }
  if (variant == AdaFilterVariant::kBh) {
    for (double s : st.selection) {
      if (s > 0.0 && s < alpha) breaks.push_back(s);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::vector<double> f_sorted = st.filter;
  std::vector<double> s_sorted = st.selection;
  std::sort(f_sorted.begin(), f_sorted.end());
  std::sort(s_sorted.begin(), s_sorted.end());
  auto count_leq = [](const std::vector<double>& v, double x) {
    return static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
  };

  double best = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lo = breaks[k];
    const double hi = breaks[k + 1];
    // For gamma in (lo, hi]: #{F < gamma} = #{F <= lo}, likewise for S.
    const double c_f = count_leq(f_sorted, lo);
    if (c_f == 0.0) {
      best = hi;
      continue;
    }
    const double denom = variant == AdaFilterVariant::kBh ? std::max(count_leq(s_sorted, lo), 1.0) : 1.0;
    const double cap = alpha * denom / c_f;
    if (cap > lo) best = std::min(hi, cap);
  }
  return best;
}

inline std::vector<std::size_t> adafilter_reject(const AdaFilterStats& st, double alpha,
                                                 AdaFilterVariant variant) {
  const double gamma0 = adafilter_gamma0(st, alpha, variant);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (st.selection[i] < gamma0) out.push_back(i);
  }
  return out;
}

inline std::vector<std::size_t> adafilter_bonferroni(const AdaFilterStats& st, double alpha) {
  return adafilter_reject(st, alpha, AdaFilterVariant::kBonferroni);
}

inline std::vector<std::size_t> adafilter_bh(const AdaFilterStats& st, double alpha) {
  return adafilter_reject(st, alpha, AdaFilterVariant::kBh);
}

struct AdaFilterAdjusted {
  std::vector<double> bon;          // capped at 1
  std::vector<double> bh;           // capped at 1
  std::vector<double> bon_uncapped;
};

/// Step-up adjustment applied to Bonferroni-type adjusted values. Pass uncapped values
/// when they may exceed 1, otherwise large families can be under-adjusted.
inline std::vector<double> adafilter_bh_from_bon(std::span<const double> bon) {
  return proc2_adjusted(bon);
}

inline AdaFilterAdjusted adafilter_adjusted(const AdaFilterStats& st) {
  AdaFilterAdjusted out;
  const std::size_t m = st.size();
  std::vector<double> f_sorted = st.filter;
  std::sort(f_sorted.begin(), f_sorted.end());
  out.bon_uncapped.resize(m);
  out.bon.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = st.selection[i];
    const auto count = std::upper_bound(f_sorted.begin(), f_sorted.end(), s) - f_sorted.begin();
    out.bon_uncapped[i] = s * static_cast<double>(count);
    out.bon[i] = std::min(1.0, out.bon_uncapped[i]);
  }
  out.bh = adafilter_bh_from_bon(out.bon_uncapped);
  return out;
}

struct DirectionalAdaFilterResult {
  std::vector<std::size_t> right;
  std::vector<std::size_t> left;
  std::vector<std::size_t> conflicts;  // rejected in both directions; excluded from both lists
};

/// Runs the chosen variant at alpha / 2 on the right-sided and on the left-sided p-values.
inline DirectionalAdaFilterResult directional_adafilter(const PValueMatrix& p, const PValueMatrix& q,
                                                        int r, double alpha,
                                                        AdaFilterVariant variant) {
  detail::check_alpha(alpha);
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw InputError("right and left p-value matrices differ in shape");
  }
  const auto right = adafilter_reject(adafilter_stats(p, r), alpha / 2.0, variant);
  const auto left = adafilter_reject(adafilter_stats(q, r), alpha / 2.0, variant);
  DirectionalAdaFilterResult out;
  out.conflicts = detail::intersect(right, left);
  std::set_difference(right.begin(), right.end(), out.conflicts.begin(), out.conflicts.end(),
                      std::back_inserter(out.right));
  std::set_difference(left.begin(), left.end(), out.conflicts.begin(), out.conflicts.end(),
                      std::back_inserter(out.left));
  return out;
}

inline DirectionalAdaFilterResult directional_adafilter(const PValueMatrix& p, int r, double alpha,
                                                        AdaFilterVariant variant) {
  return directional_adafilter(p, left_sided(p), r, alpha, variant);
}

}  // namespace replikit
