#pragma once

// Lower confidence bounds on the number of studies with signal for a selected set of
// features, with false coverage rate control. Right-sided p-values only; callers with
// two-sided data convert beforehand.

#include <cstddef>
#include <span>
#include <vector>

#include "replikit/base_mt.hpp"
#include "replikit/error.hpp"
#include "replikit/matrix.hpp"
#include "replikit/pvalue_core.hpp"

namespace replikit {

struct BoundsReport {
  std::vector<std::size_t> selected;  // ascending
  std::vector<int> bounds;            // bounds[k] belongs to selected[k]
  double level_used = 0.0;
};

struct BoundsOptions {
  // Experimental: divide alpha by the harmonic number H_|S| for arbitrary dependence.
  bool arbitrary_dependence = false;
};

inline double harmonic_number(std::size_t k) {
  double h = 0.0;
  for (std::size_t i = 1; i <= k; ++i) h += 1.0 / static_cast<double>(i);
  return h;
}

/// Prefix-tests each selected feature at level |S| alpha / m.
template <PcCombiner C = FisherCombiner>
BoundsReport bounds_for_selection(const PValueMatrix& p, std::vector<std::size_t> selected,
                                  double alpha, const C& combiner = {},
                                  const BoundsOptions& opts = {}) {
  detail::check_alpha(alpha);
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  BoundsReport rep;
  if (selected.empty() || p.rows() == 0) return rep;
  if (selected.back() >= p.rows()) throw InputError("selected feature index out of range");
  double a = alpha;
  if (opts.arbitrary_dependence) a /= harmonic_number(selected.size());
  rep.level_used = static_cast<double>(selected.size()) * a / static_cast<double>(p.rows());
  rep.bounds.reserve(selected.size());
  for (auto i : selected) rep.bounds.push_back(prefix_bound(p.row(i), rep.level_used, combiner));
  rep.selected = std::move(selected);
  return rep;
}

/// Selects by BH at level alpha on the global-null PC p-values, then bounds the selection.
template <PcCombiner C = FisherCombiner>
BoundsReport proc3_bhy(const PValueMatrix& p, double alpha, const C& combiner = {},
                       const BoundsOptions& opts = {}) {
  detail::check_alpha(alpha);
  std::vector<double> global(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) global[i] = pc_pvalue(p.row(i), 1, combiner);
  return bounds_for_selection(p, bh(global, alpha).rejected, alpha, combiner, opts);
}

template <PcCombiner C = FisherCombiner>
BoundsReport proc4_selected(const PValueMatrix& p, std::vector<std::size_t> selected, double alpha,
                            const C& combiner = {}, const BoundsOptions& opts = {}) {
  return bounds_for_selection(p, std::move(selected), alpha, combiner, opts);
}

// Bonferroni discoveries of a single study, a common external selection.
inline std::vector<std::size_t> bonferroni_on_study(const PValueMatrix& p, std::size_t study,
                                                    double alpha) {
  if (study >= p.cols()) throw InputError("study index out of range");
  return bonferroni(p.column(study), alpha).rejected;
}

}  // namespace replikit
