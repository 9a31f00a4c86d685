#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "replikit/pc_bounds.hpp"
#include "replikit/stats/rng.hpp"
#include "replikit/stats/special.hpp"

using namespace replikit;

namespace {

using Idx = std::vector<std::size_t>;

PValueMatrix random_matrix(stats::RngStream& rng, std::size_t m, std::size_t n, std::vector<int>* truth = nullptr) {
  PValueMatrix p(m, n);
  if (truth) truth->assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto k = rng.below(n + 1);  // number of studies with signal
    if (truth) (*truth)[i] = static_cast<int>(k);
    for (std::size_t j = 0; j < n; ++j) {
      p(i, j) = j < k ? stats::normal_sf(3.0 + rng.normal()).value() : rng.uniform();
    }
  }
  return p;
}

}  // namespace

TEST(Proc3, Example) {
  PValueMatrix p = PValueMatrix::from_rows({{1e-6, 1e-6, 1e-6}, {0.5, 0.5, 0.5}});
  auto rep = proc3_bhy(p, 0.05);
  EXPECT_EQ(rep.selected, (Idx{0}));
  EXPECT_NEAR(rep.level_used, 0.025, 1e-15);
  ASSERT_EQ(rep.bounds.size(), 1u);
  EXPECT_EQ(rep.bounds[0], 3);
}

TEST(Proc3, SelectedFeaturesHaveBoundAtLeastOne) {
  stats::RngStream rng(41, 0);
  for (int t = 0; t < 500; ++t) {
    auto p = random_matrix(rng, 1 + rng.below(40), 1 + rng.below(5));
    auto rep = proc3_bhy(p, 0.1);
    for (int b : rep.bounds) EXPECT_GE(b, 1);
  }
}

TEST(Proc4, Examples) {
  PValueMatrix p = PValueMatrix::from_rows({{1e-4, 0.01, 0.3}, {0.02, 0.5, 0.5}, {0.9, 0.9, 0.1}});
  auto all = proc4_selected(p, {0, 1, 2}, 0.05);
  EXPECT_DOUBLE_EQ(all.level_used, 0.05);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(all.bounds[k], studies_lower_bound(p.row(k), 0.05));
  }
  auto none = proc4_selected(p, {}, 0.05);
  EXPECT_TRUE(none.selected.empty());
  EXPECT_TRUE(none.bounds.empty());
  EXPECT_THROW(proc4_selected(p, {7}, 0.05), InputError);
}

TEST(Proc4, BonferroniSelectionOnOneStudy) {
  PValueMatrix p = PValueMatrix::from_rows({{1e-4, 0.01}, {0.02, 0.5}, {0.9, 0.9}});
  EXPECT_EQ(bonferroni_on_study(p, 0, 0.05), (Idx{0}));
  EXPECT_THROW(bonferroni_on_study(p, 2, 0.05), InputError);
}

TEST(Bounds, PrefixCoherence) {
  stats::RngStream rng(42, 0);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.below(5);
    auto p = random_matrix(rng, 1 + rng.below(40), n);
    auto rep = proc3_bhy(p, 0.1);
    for (std::size_t k = 0; k < rep.selected.size(); ++k) {
      const auto prof = pc_pvalue_profile(p.row(rep.selected[k]));
      const int l = rep.bounds[k];
      for (int r = 1; r <= l; ++r) EXPECT_LE(prof[r - 1], rep.level_used);
      if (l < static_cast<int>(n)) {
        EXPECT_GT(prof[l], rep.level_used);
      }
    }
  }
}

TEST(Bounds, MonotoneInAlphaForFixedSelection) {
  stats::RngStream rng(43, 0);
  for (int t = 0; t < 300; ++t) {
    auto p = random_matrix(rng, 1 + rng.below(30), 1 + rng.below(5));
    Idx sel;
    for (std::size_t i = 0; i < p.rows(); ++i) {
      if (rng.bernoulli(0.5)) sel.push_back(i);
    }
    std::vector<int> prev;
    for (double a : {0.01, 0.05, 0.1, 0.3}) {
      auto rep = proc4_selected(p, sel, a);
      if (!prev.empty()) {
        for (std::size_t k = 0; k < prev.size(); ++k) EXPECT_GE(rep.bounds[k], prev[k]);
      }
      prev = rep.bounds;
    }
  }
}

TEST(Bounds, ArbitraryDependenceShrinksLevel) {
  PValueMatrix p = PValueMatrix::from_rows({{1e-5, 1e-5}, {1e-5, 1e-3}, {0.3, 0.3}});
  BoundsOptions opts;
  opts.arbitrary_dependence = true;
  auto plain = proc4_selected(p, {0, 1}, 0.05);
  auto dep = proc4_selected(p, {0, 1}, 0.05, FisherCombiner{}, opts);
  EXPECT_NEAR(dep.level_used, plain.level_used / harmonic_number(2), 1e-15);
  EXPECT_NEAR(harmonic_number(3), 1.0 + 0.5 + 1.0 / 3.0, 1e-15);
}

TEST(Bounds, FcrControlProperty) {
  // Fraction of selected features whose bound exceeds the true signal count.
  const int reps = 2000;
  const double alpha = 0.1;
  double sum = 0, sum2 = 0;
  for (int k = 0; k < reps; ++k) {
    stats::RngStream rng(44, static_cast<std::uint64_t>(k));
    std::vector<int> truth;
    auto p = random_matrix(rng, 30, 4, &truth);
    auto rep = proc3_bhy(p, alpha);
    double frac = 0.0;
    if (!rep.selected.empty()) {
      int bad = 0;
      for (std::size_t j = 0; j < rep.selected.size(); ++j) bad += rep.bounds[j] > truth[rep.selected[j]];
      frac = static_cast<double>(bad) / rep.selected.size();
    }
    sum += frac;
    sum2 += frac * frac;
  }
  const double mean = sum / reps;
  const double se = std::sqrt(std::max(sum2 / reps - mean * mean, 0.0) / reps);
  EXPECT_LE(mean, alpha + 3.0 * se);
}
