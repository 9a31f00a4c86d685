#pragma once

// Cross-screening for minimal (2 of 2, or 2 of n with a two-group split) replicability.
//
// Each study selects promising features from its own p-values. Study one's features are
// then tested only among those selected by study two, and vice versa. A feature is
// replicated when both cross-tests reject it.

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "replikit/base_mt.hpp"
#include "replikit/error.hpp"
#include "replikit/matrix.hpp"
#include "replikit/pvalue_core.hpp"

namespace replikit {

class SelectionRule {
 public:
  enum class Kind { kBhLevel, kPThreshold, kTopK, kCustomSet };

  static SelectionRule bh_level(double level) { return SelectionRule(Kind::kBhLevel, level, 0, {}); }
  static SelectionRule p_threshold(double t) { return SelectionRule(Kind::kPThreshold, t, 0, {}); }
  static SelectionRule top_k(std::size_t k) { return SelectionRule(Kind::kTopK, 0.0, k, {}); }
  static SelectionRule custom_set(std::vector<std::size_t> set) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return SelectionRule(Kind::kCustomSet, 0.0, 0, std::move(set));
  }

  // Accepts "bh:0.05", "p:0.01", "top:100".
  static SelectionRule parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw InputError("selection rule must look like kind:value");
    const std::string kind = text.substr(0, colon);
    const std::string value = text.substr(colon + 1);
    try {
      if (kind == "bh") return bh_level(std::stod(value));
      if (kind == "p") return p_threshold(std::stod(value));
      if (kind == "top") return top_k(static_cast<std::size_t>(std::stoul(value)));
    } catch (const std::logic_error&) {
      throw InputError("bad selection rule value in '" + text + "'");
    }
    throw InputError("unknown selection rule '" + kind + "'");
  }

  Kind kind() const { return kind_; }
  double level() const { return level_; }

  // Selected indices (ascending) from one study's p-values.
  std::vector<std::size_t> apply(std::span<const double> p) const {
    switch (kind_) {
      case Kind::kBhLevel: return bh(p, level_).rejected;
      case Kind::kPThreshold: return detail::leq_threshold(p, level_);
      case Kind::kTopK: {
        auto order = detail::order_by_pvalue(p);
        order.resize(std::min(k_, order.size()));
        std::sort(order.begin(), order.end());
        return order;
      }
      case Kind::kCustomSet: {
        for (auto i : set_) {
          if (i >= p.size()) throw InputError("custom selection index out of range");
        }
        return set_;
      }
    }
    return {};
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::kBhLevel: os << "bh:" << level_; break;
      case Kind::kPThreshold: os << "p:" << level_; break;
      case Kind::kTopK: os << "top:" << k_; break;
      case Kind::kCustomSet: os << "custom(" << set_.size() << ")"; break;
    }
    return os.str();
  }

 private:
  SelectionRule(Kind kind, double level, std::size_t k, std::vector<std::size_t> set)
      : kind_(kind), level_(level), k_(k), set_(std::move(set)) {}

  Kind kind_;
  double level_;
  std::size_t k_;
  std::vector<std::size_t> set_;
};

// Per-study right- and left-sided p-values for two studies (or two groups of studies).
struct TwoStudyPValues {
  std::vector<double> p1, q1, p2, q2;

  static TwoStudyPValues continuous(std::vector<double> p1, std::vector<double> p2) {
    TwoStudyPValues out;
    out.q1.resize(p1.size());
    out.q2.resize(p2.size());
    std::transform(p1.begin(), p1.end(), out.q1.begin(), [](double v) { return 1.0 - v; });
    std::transform(p2.begin(), p2.end(), out.q2.begin(), [](double v) { return 1.0 - v; });
    out.p1 = std::move(p1);
    out.p2 = std::move(p2);
    return out;
  }

  std::size_t size() const { return p1.size(); }

  void validate() const {
    const std::size_t m = p1.size();
    if (p2.size() != m || q1.size() != m || q2.size() != m) {
      throw InputError("cross-screening inputs must have equal lengths");
    }
  }
};

struct SwitchedPair {
  double p1 = 1.0;
  double p2 = 1.0;
  Direction direction = Direction::kRight;
};

/// Direction switch for two-sided alternatives: each study is tested in the direction the
/// other study points to. Ties q == p take the right-sided branch. A feature whose two
/// studies point in opposite directions gets Direction::kNone.
inline SwitchedPair twosided_switch(double p1, double q1, double p2, double q2) {
  SwitchedPair out;
  const bool left1 = q2 < p2;  // study two points left, so study one is tested leftwards
  const bool left2 = q1 < p1;
  out.p1 = left1 ? q1 : p1;
  out.p2 = left2 ? q2 : p2;
  if (left1 && left2) {
    out.direction = Direction::kLeft;
  } else if (!left1 && !left2) {
    out.direction = Direction::kRight;
  } else {
    out.direction = Direction::kNone;
  }
  return out;
}

enum class ScreenErrorRate { kFwer, kFdr };
enum class FwerBase { kBonferroni, kHolm };

struct CrossScreenConfig {
  ScreenErrorRate error_rate = ScreenErrorRate::kFdr;
  FwerBase base = FwerBase::kBonferroni;
  SelectionRule rule1 = SelectionRule::bh_level(0.05);
  SelectionRule rule2 = SelectionRule::bh_level(0.05);
  double alpha = 0.05;
  bool two_sided = false;
  // Experimental: scale each family size by a Storey null-proportion estimate.
  bool plugin = false;
  double lambda = 0.5;
};

struct CrossScreenCandidate {
  std::size_t feature = 0;
  double p1_prime = 1.0;
  double p2_prime = 1.0;
  double adjusted_bon = 1.0;  // capped at 1
  double adjusted_bh = 1.0;   // capped at 1
  Direction direction = Direction::kRight;
  bool replicated = false;
};

struct CrossScreenReport {
  std::vector<std::size_t> selected1;
  std::vector<std::size_t> selected2;
  std::vector<CrossScreenCandidate> candidates;  // S1 ∩ S2, ascending feature index
  std::vector<std::size_t> replicated;           // ascending
  double family_size1 = 0.0;  // effective |S2| used for study one's tests
  double family_size2 = 0.0;  // effective |S1| used for study two's tests
  std::string grouping;
};

/// Bonferroni-based adjusted p-value 2 * max(|S2| p'1, |S1| p'2), before capping.
inline double proc1_adjusted_uncapped(double p1_prime, double p2_prime, double size_s1,
                                      double size_s2) {
  return 2.0 * std::max(size_s2 * p1_prime, size_s1 * p2_prime);
}

inline double proc1_adjusted(double p1_prime, double p2_prime, double size_s1, double size_s2) {
  return std::min(1.0, proc1_adjusted_uncapped(p1_prime, p2_prime, size_s1, size_s2));
}

/// Step-up adjusted values over the candidate family: for each i, the minimum over
/// {j : b_j >= b_i} of b_j / #{k : b_k <= b_j}. Input must be uncapped; output is capped.
inline std::vector<double> proc2_adjusted(std::span<const double> bon) {
  const std::size_t c = bon.size();
  std::vector<double> out(c, 1.0);
  if (c == 0) return out;
  const auto order = detail::order_by_pvalue(bon);
  // rank_j = #{k : b_k <= b_j}: for tied values, the index of the last tie plus one.
  std::vector<double> ratio(c);
  std::size_t k = 0;
  while (k < c) {
    std::size_t end = k;
    while (end + 1 < c && bon[order[end + 1]] == bon[order[k]]) ++end;
    for (std::size_t t = k; t <= end; ++t) {
      ratio[t] = bon[order[t]] / static_cast<double>(end + 1);
    }
    k = end + 1;
  }
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t t = c; t >= 1; --t) {
    running = std::min(running, ratio[t - 1]);
    out[order[t - 1]] = std::min(1.0, running);
  }
  return out;
}

namespace detail {

inline std::vector<std::size_t> intersect(const std::vector<std::size_t>& a,
                                          const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::vector<double> two_sided_pvalues(std::span<const double> p, std::span<const double> q) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::min(1.0, 2.0 * std::min(p[i], q[i]));
  return out;
}

}  // namespace detail

/// Runs the FWER (Procedure-1 style) or FDR (Procedure-2 style) cross-screening analysis.
inline CrossScreenReport cross_screen(const TwoStudyPValues& in, const CrossScreenConfig& cfg) {
  in.validate();
  detail::check_alpha(cfg.alpha);
  const std::size_t m = in.size();
  CrossScreenReport rep;

  if (cfg.two_sided) {
    rep.selected1 = cfg.rule1.apply(detail::two_sided_pvalues(in.p1, in.q1));
    rep.selected2 = cfg.rule2.apply(detail::two_sided_pvalues(in.p2, in.q2));
  } else {
    rep.selected1 = cfg.rule1.apply(in.p1);
    rep.selected2 = cfg.rule2.apply(in.p2);
  }

  std::vector<SwitchedPair> switched(m);
  for (std::size_t i = 0; i < m; ++i) {
    switched[i] = cfg.two_sided ? twosided_switch(in.p1[i], in.q1[i], in.p2[i], in.q2[i])
                                : SwitchedPair{in.p1[i], in.p2[i], Direction::kRight};
  }

  const auto common = detail::intersect(rep.selected1, rep.selected2);
  rep.family_size1 = static_cast<double>(rep.selected2.size());
  rep.family_size2 = static_cast<double>(rep.selected1.size());
  if (cfg.plugin) {
    if (cfg.error_rate == ScreenErrorRate::kFwer && cfg.base == FwerBase::kHolm) {
      throw InputError("plug-in variant is available with the Bonferroni base or the FDR procedure");
    }
    std::vector<double> sel1, sel2;
    for (auto i : rep.selected2) sel1.push_back(switched[i].p1);
    for (auto i : rep.selected1) sel2.push_back(switched[i].p2);
    if (!sel1.empty()) {
      rep.family_size1 = std::max(1.0, rep.family_size1 * storey_pi0(sel1, cfg.lambda));
    }
    if (!sel2.empty()) {
      rep.family_size2 = std::max(1.0, rep.family_size2 * storey_pi0(sel2, cfg.lambda));
    }
  }
  if (common.empty()) return rep;

  std::vector<double> bon_uncapped(common.size());
  rep.candidates.resize(common.size());
  for (std::size_t c = 0; c < common.size(); ++c) {
    const auto i = common[c];
    auto& cand = rep.candidates[c];
    cand.feature = i;
    cand.p1_prime = switched[i].p1;
    cand.p2_prime = switched[i].p2;
    cand.direction = switched[i].direction;
    bon_uncapped[c] = proc1_adjusted_uncapped(cand.p1_prime, cand.p2_prime, rep.family_size2,
                                              rep.family_size1);
    cand.adjusted_bon = std::min(1.0, bon_uncapped[c]);
  }
  const auto bh_adj = proc2_adjusted(bon_uncapped);
  for (std::size_t c = 0; c < common.size(); ++c) rep.candidates[c].adjusted_bh = bh_adj[c];

  const double half = cfg.alpha / 2.0;
  if (cfg.error_rate == ScreenErrorRate::kFwer) {
    if (cfg.base == FwerBase::kBonferroni) {
      const double t1 = half / rep.family_size1;
      const double t2 = half / rep.family_size2;
      for (auto& cand : rep.candidates) cand.replicated = cand.p1_prime <= t1 && cand.p2_prime <= t2;
    } else {
      // Holm on {p'1 : i in S2} and on {p'2 : i in S1}; the adjusted value reported is
      // 2 * max of the two Holm-adjusted values, dual to rejection at alpha / 2.
      std::vector<double> fam1, fam2;
      for (auto i : rep.selected2) fam1.push_back(switched[i].p1);
      for (auto i : rep.selected1) fam2.push_back(switched[i].p2);
      const auto h1 = holm(fam1, half);
      const auto h2 = holm(fam2, half);
      std::vector<bool> rej1(m, false), rej2(m, false);
      std::vector<double> adj1(m, 1.0), adj2(m, 1.0);
      for (std::size_t k = 0; k < rep.selected2.size(); ++k) adj1[rep.selected2[k]] = h1.adjusted[k];
      for (auto k : h1.rejected) rej1[rep.selected2[k]] = true;
      for (std::size_t k = 0; k < rep.selected1.size(); ++k) adj2[rep.selected1[k]] = h2.adjusted[k];
      for (auto k : h2.rejected) rej2[rep.selected1[k]] = true;
      for (auto& cand : rep.candidates) {
        cand.replicated = rej1[cand.feature] && rej2[cand.feature];
        cand.adjusted_bon = std::min(1.0, 2.0 * std::max(adj1[cand.feature], adj2[cand.feature]));
      }
    }
  } else {
    // Largest r with #{candidates passing both r-scaled thresholds} == r. The count as a
    // function of r is read off the sorted r needed by each candidate.
    const double scale1 = 2.0 * rep.family_size1 / cfg.alpha;
    const double scale2 = 2.0 * rep.family_size2 / cfg.alpha;
    auto passes = [&](const CrossScreenCandidate& cand, double r) {
      return cand.p1_prime <= r * cfg.alpha / (2.0 * rep.family_size1) &&
             cand.p2_prime <= r * cfg.alpha / (2.0 * rep.family_size2);
    };
    std::vector<double> needed(rep.candidates.size());
    for (std::size_t c = 0; c < needed.size(); ++c) {
      needed[c] = std::max(rep.candidates[c].p1_prime * scale1, rep.candidates[c].p2_prime * scale2);
    }
    std::sort(needed.begin(), needed.end());
    std::size_t rmax = 0;
    for (std::size_t r = needed.size(); r >= 1; --r) {
      if (needed[r - 1] > static_cast<double>(r) * (1.0 + 1e-12)) continue;
      const auto count = static_cast<std::size_t>(std::count_if(
          rep.candidates.begin(), rep.candidates.end(),
          [&](const CrossScreenCandidate& cand) { return passes(cand, static_cast<double>(r)); }));
      if (count == r) {
        rmax = r;
        break;
      }
    }
    for (auto& cand : rep.candidates) {
      cand.replicated = rmax > 0 && passes(cand, static_cast<double>(rmax));
    }
  }

  for (const auto& cand : rep.candidates) {
    if (cand.replicated) rep.replicated.push_back(cand.feature);
  }
  return rep;
}

inline CrossScreenReport proc1_fwer(const TwoStudyPValues& in, const SelectionRule& rule1,
                                    const SelectionRule& rule2, double alpha, FwerBase base,
                                    bool two_sided = false) {
  CrossScreenConfig cfg;
  cfg.error_rate = ScreenErrorRate::kFwer;
  cfg.base = base;
  cfg.rule1 = rule1;
  cfg.rule2 = rule2;
  cfg.alpha = alpha;
  cfg.two_sided = two_sided;
  return cross_screen(in, cfg);
}

inline CrossScreenReport proc2_fdr(const TwoStudyPValues& in, const SelectionRule& rule1,
                                   const SelectionRule& rule2, double alpha,
                                   bool two_sided = false) {
  CrossScreenConfig cfg;
  cfg.error_rate = ScreenErrorRate::kFdr;
  cfg.rule1 = rule1;
  cfg.rule2 = rule2;
  cfg.alpha = alpha;
  cfg.two_sided = two_sided;
  return cross_screen(in, cfg);
}

struct StudyGrouping {
  std::vector<std::size_t> group1;  // zero-based study columns
  std::vector<std::size_t> group2;

  // "1,2;3,4" with one-based study numbers.
  static StudyGrouping parse(const std::string& text) {
    StudyGrouping g;
    const auto semi = text.find(';');
    if (semi == std::string::npos) throw InputError("grouping must look like '1,2;3,4'");
    auto parse_list = [&](const std::string& part, std::vector<std::size_t>& out) {
      std::stringstream ss(part);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          const long v = std::stol(item);
          if (v < 1) throw InputError("study numbers in a grouping are one-based");
          out.push_back(static_cast<std::size_t>(v - 1));
        } catch (const std::logic_error&) {
          throw InputError("bad study number '" + item + "' in grouping");
        }
      }
    };
    parse_list(text.substr(0, semi), g.group1);
    parse_list(text.substr(semi + 1), g.group2);
    return g;
  }

  std::string describe() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < group1.size(); ++k) os << (k ? "," : "") << group1[k] + 1;
    os << ";";
    for (std::size_t k = 0; k < group2.size(); ++k) os << (k ? "," : "") << group2[k] + 1;
    return os.str();
  }
};

/// Collapses n studies into two groups by Fisher global-null p-values in each direction.
inline TwoStudyPValues group_combine(const PValueMatrix& p, const PValueMatrix& q,
                                     const StudyGrouping& grouping) {
  if (grouping.group1.empty() || grouping.group2.empty()) {
    throw InputError("both study groups must be non-empty");
  }
  std::vector<bool> seen(p.cols(), false);
  for (const auto* g : {&grouping.group1, &grouping.group2}) {
    for (auto j : *g) {
      if (j >= p.cols()) throw InputError("grouping refers to a study beyond the input columns");
      if (seen[j]) throw InputError("grouping lists a study twice");
      seen[j] = true;
    }
  }
  const auto p1 = p.select_columns(grouping.group1);
  const auto q1 = q.select_columns(grouping.group1);
  const auto p2 = p.select_columns(grouping.group2);
  const auto q2 = q.select_columns(grouping.group2);
  TwoStudyPValues out;
  const std::size_t m = p.rows();
  out.p1.resize(m);
  out.q1.resize(m);
  out.p2.resize(m);
  out.q2.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.p1[i] = fisher_pc_pvalue(p1.row(i), 1);
    out.q1[i] = fisher_pc_pvalue(q1.row(i), 1);
    out.p2[i] = fisher_pc_pvalue(p2.row(i), 1);
    out.q2[i] = fisher_pc_pvalue(q2.row(i), 1);
  }
  return out;
}

inline CrossScreenReport grouped_generalization(const PValueMatrix& p, const PValueMatrix& q,
                                                const StudyGrouping& grouping,
                                                const CrossScreenConfig& cfg) {
  auto rep = cross_screen(group_combine(p, q, grouping), cfg);
  rep.grouping = grouping.describe();
  return rep;
}

inline CrossScreenReport grouped_generalization(const PValueMatrix& p, const StudyGrouping& grouping,
                                                const CrossScreenConfig& cfg) {
  return grouped_generalization(p, left_sided(p), grouping, cfg);
}

}  // namespace replikit
