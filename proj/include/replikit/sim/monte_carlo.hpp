#pragma once

// Monte-Carlo estimation of replicability error rates. Replicates are processed in fixed
// chunks; chunk accumulators are merged in chunk order, so estimates do not depend on
// how chunks are scheduled across threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "replikit/adafilter.hpp"
#include "replikit/base_mt.hpp"
#include "replikit/cross_screen.hpp"
#include "replikit/ebayes.hpp"
#include "replikit/error.hpp"
#include "replikit/knockoff.hpp"
#include "replikit/pc_bounds.hpp"
#include "replikit/pvalue_core.hpp"
#include "replikit/sim/scenario.hpp"
#include "replikit/stats/rng.hpp"

namespace replikit::sim {

struct PipelineSpec {
  // naive, cross_screen, pc_bh, pc_bonferroni, proc3, proc4, adafilter_bonferroni,
  // adafilter_bh, knockoff, lfdr_oracle
  std::string name = "naive";
  int r = 2;
  double alpha = 0.05;
  MtProcedure within = MtProcedure::kBonferroni;  // naive: per-study procedure
  bool pairwise = false;      // naive: any two studies instead of study one plus another
  bool two_sided = false;     // cross_screen, pc_*, adafilter_*
  ScreenErrorRate screen_rate = ScreenErrorRate::kFdr;
  FwerBase screen_base = FwerBase::kBonferroni;
  std::string grouping;       // cross_screen with n > 2; default splits the studies in half
  double c = 0.5;             // knockoff
};

inline const std::vector<std::string>& pipeline_names() {
  static const std::vector<std::string> names{
      "naive", "cross_screen", "pc_bh", "pc_bonferroni", "proc3", "proc4",
      "adafilter_bonferroni", "adafilter_bh", "knockoff", "lfdr_oracle"};
  return names;
}

struct Claim {
  std::size_t feature = 0;
  Direction direction = Direction::kRight;
};

struct ReplicateOutput {
  std::vector<Claim> claims;
  std::vector<std::pair<std::size_t, int>> bounds;  // bound pipelines only
};

// Per-replicate counts. A claim is true when its direction matches at least r studies
// with signal of that sign; claims without a direction are always false.
struct ReplicateCounts {
  std::size_t rejections = 0;
  std::size_t false_claims = 0;
  std::size_t true_claims = 0;
  std::size_t replicable = 0;  // features with n+ >= r or n- >= r
  std::size_t selected = 0;
  std::size_t coverage_violations = 0;
};

inline ReplicateCounts count_replicate(const ReplicateOutput& out, const ReplicateData& data, int r) {
  ReplicateCounts c;
  c.rejections = out.claims.size();
  for (const auto& claim : out.claims) {
    const bool right_true = data.n_pos[claim.feature] >= r;
    const bool left_true = data.n_neg[claim.feature] >= r;
    const bool ok = (claim.direction == Direction::kRight && right_true) ||
                    (claim.direction == Direction::kLeft && left_true);
    if (ok) ++c.true_claims;
  }
  for (const auto& claim : out.claims) {
    const bool is_false =
        claim.direction == Direction::kNone ||
        (claim.direction == Direction::kRight && data.n_pos[claim.feature] < r) ||
        (claim.direction == Direction::kLeft && data.n_neg[claim.feature] < r);
    if (is_false) ++c.false_claims;
  }
  if (c.false_claims + c.true_claims != c.rejections) {
    throw NumericalError("false and true claim counts do not add up to the number of claims");
  }
  for (std::size_t i = 0; i < data.n_pos.size(); ++i) {
    if (data.n_pos[i] >= r || data.n_neg[i] >= r) ++c.replicable;
  }
  c.selected = out.bounds.size();
  for (const auto& [i, l] : out.bounds) {
    if (l > data.n_pos[i]) ++c.coverage_violations;
  }
  return c;
}

namespace detail {

inline std::vector<Claim> right_claims(const std::vector<std::size_t>& idx) {
  std::vector<Claim> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back({i, Direction::kRight});
  return out;
}

inline StudyGrouping default_grouping(std::size_t n) {
  StudyGrouping g;
  const std::size_t half = (n + 1) / 2;
  for (std::size_t j = 0; j < n; ++j) (j < half ? g.group1 : g.group2).push_back(j);
  return g;
}

}  // namespace detail

/// Runs one pipeline on one replicate. `rng` supplies any auxiliary randomness.
inline ReplicateOutput run_pipeline(const PipelineSpec& pl, const ScenarioSpec& spec,
                                    const ReplicateData& data, stats::RngStream& rng) {
  ReplicateOutput out;
  const auto& p = data.p;
  const std::size_t m = p.rows();
  const std::size_t n = p.cols();
  if (pl.name == "naive") {
    std::vector<int> hits(m, 0);
    std::vector<bool> first(m, false), other(m, false);
    for (std::size_t j = 0; j < n; ++j) {
      for (auto i : run_procedure(pl.within, p.column(j), pl.alpha).rejected) {
        ++hits[i];
        (j == 0 ? first[i] : other[i]) = true;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      const bool claim = pl.pairwise ? hits[i] >= 2 : (first[i] && other[i]);
      if (claim) out.claims.push_back({i, Direction::kRight});
    }
  } else if (pl.name == "cross_screen") {
    CrossScreenConfig cfg;
    cfg.error_rate = pl.screen_rate;
    cfg.base = pl.screen_base;
    cfg.alpha = pl.alpha;
    cfg.rule1 = cfg.rule2 = SelectionRule::bh_level(pl.alpha);
    cfg.two_sided = pl.two_sided;
    const auto grouping = pl.grouping.empty() ? detail::default_grouping(n) : StudyGrouping::parse(pl.grouping);
    const auto rep = n == 2 && pl.grouping.empty()
                         ? cross_screen(TwoStudyPValues::continuous(p.column(0), p.column(1)), cfg)
                         : grouped_generalization(p, grouping, cfg);
    for (const auto& cand : rep.candidates) {
      if (cand.replicated) out.claims.push_back({cand.feature, cand.direction});
    }
  } else if (pl.name == "pc_bh" || pl.name == "pc_bonferroni") {
    std::vector<double> pc(m);
    std::vector<Direction> dir(m, Direction::kRight);
    for (std::size_t i = 0; i < m; ++i) {
      if (pl.two_sided) {
        const auto res = directional_pc_pvalue(StudyPValues(std::vector<double>(p.row(i).begin(), p.row(i).end())), pl.r);
        pc[i] = res.pvalue;
        dir[i] = res.direction;
      } else {
        pc[i] = fisher_pc_pvalue(p.row(i), pl.r);
      }
    }
    const auto res = pl.name == "pc_bh" ? bh(pc, pl.alpha) : bonferroni(pc, pl.alpha);
    for (auto i : res.rejected) out.claims.push_back({i, dir[i]});
  } else if (pl.name == "proc3" || pl.name == "proc4") {
    const auto rep = pl.name == "proc3" ? proc3_bhy(p, pl.alpha)
                                        : proc4_selected(p, bonferroni_on_study(p, 0, pl.alpha), pl.alpha);
    for (std::size_t k = 0; k < rep.selected.size(); ++k) out.bounds.emplace_back(rep.selected[k], rep.bounds[k]);
  } else if (pl.name == "adafilter_bonferroni" || pl.name == "adafilter_bh") {
    const auto variant = pl.name == "adafilter_bh" ? AdaFilterVariant::kBh : AdaFilterVariant::kBonferroni;
    if (pl.two_sided) {
      const auto res = directional_adafilter(p, pl.r, pl.alpha, variant);
      for (auto i : res.right) out.claims.push_back({i, Direction::kRight});
      for (auto i : res.left) out.claims.push_back({i, Direction::kLeft});
      for (auto i : res.conflicts) out.claims.push_back({i, Direction::kNone});
    } else {
      out.claims = detail::right_claims(adafilter_reject(adafilter_stats(p, pl.r), pl.alpha, variant));
    }
  } else if (pl.name == "knockoff") {
    KnockoffConfig cfg;
    cfg.r = pl.r;
    cfg.alpha = pl.alpha;
    cfg.c = pl.c;
    out.claims = detail::right_claims(knockoff_filter(p, cfg, rng).rejected);
  } else if (pl.name == "lfdr_oracle") {
    if (!spec.two_group) throw InputError("lfdr_oracle needs a two-group scenario");
    const auto t = local_fdr(data.z, *spec.two_group, pl.r);
    const auto post = replicability_posteriors(data.z, *spec.two_group, pl.r);
    for (auto i : lfdr_reject(t, pl.alpha)) {
      out.claims.push_back({i, post[i].first >= post[i].second ? Direction::kRight : Direction::kLeft});
    }
  } else {
    throw InputError("unknown pipeline '" + pl.name + "'");
  }
  return out;
}

enum class Metric { kFwer, kFdr, kPfdr, kFcr, kPower, kPerFeatureError };

inline Metric parse_metric(std::string_view name) {
  if (name == "fwer") return Metric::kFwer;
  if (name == "fdr") return Metric::kFdr;
  if (name == "pfdr") return Metric::kPfdr;
  if (name == "fcr") return Metric::kFcr;
  if (name == "power") return Metric::kPower;
  if (name == "per_feature_error") return Metric::kPerFeatureError;
  throw InputError("unknown metric '" + std::string(name) + "'");
}

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::kFwer: return "fwer";
    case Metric::kFdr: return "fdr";
    case Metric::kPfdr: return "pfdr";
    case Metric::kFcr: return "fcr";
    case Metric::kPower: return "power";
    case Metric::kPerFeatureError: return "per_feature_error";
  }
  return "?";
}

inline constexpr Metric kAllMetrics[] = {Metric::kFwer, Metric::kFdr,   Metric::kPfdr,
                                         Metric::kFcr,  Metric::kPower, Metric::kPerFeatureError};

struct RunningMean {
  long double sum = 0.0L;
  long double sumsq = 0.0L;
  std::size_t count = 0;

  void add(double x) {
    sum += x;
    sumsq += static_cast<long double>(x) * x;
    ++count;
  }
  void merge(const RunningMean& o) {
    sum += o.sum;
    sumsq += o.sumsq;
    count += o.count;
  }
  double mean() const { return count ? static_cast<double>(sum / count) : 0.0; }
  double std_error() const {
    if (count < 2) return 0.0;
    const long double mu = sum / count;
    const long double var = (sumsq - count * mu * mu) / (count - 1);
    return std::sqrt(static_cast<double>(std::max(var, 0.0L)) / static_cast<double>(count));
  }
};

struct MetricAccumulator {
  std::size_t replicates = 0;
  std::size_t total_rejections = 0;
  std::size_t total_false = 0;
  std::size_t total_true = 0;
  std::map<Metric, RunningMean> metrics;

  void add(const ReplicateCounts& c, std::size_t m) {
    ++replicates;
    total_rejections += c.rejections;
    total_false += c.false_claims;
    total_true += c.true_claims;
    const double r = static_cast<double>(c.rejections);
    const double v = static_cast<double>(c.false_claims);
    metrics[Metric::kFwer].add(c.false_claims > 0 ? 1.0 : 0.0);
    metrics[Metric::kFdr].add(c.rejections ? v / r : 0.0);
    if (c.rejections) metrics[Metric::kPfdr].add(v / r);
    metrics[Metric::kFcr].add(c.selected ? static_cast<double>(c.coverage_violations) / c.selected : 0.0);
    if (c.replicable) metrics[Metric::kPower].add(static_cast<double>(c.true_claims) / c.replicable);
    metrics[Metric::kPerFeatureError].add(v / static_cast<double>(m));
  }

  void merge(const MetricAccumulator& o) {
    replicates += o.replicates;
    total_rejections += o.total_rejections;
    total_false += o.total_false;
    total_true += o.total_true;
    for (const auto& [k, v] : o.metrics) metrics[k].merge(v);
  }
};

struct Estimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;  // replicates contributing (pfdr and power skip some)
};

struct MonteCarloResult {
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  MetricAccumulator acc;

  Estimate get(Metric m) const {
    auto it = acc.metrics.find(m);
    if (it == acc.metrics.end()) return {};
    return {it->second.mean(), it->second.std_error(), it->second.count};
  }
};

struct MonteCarloOptions {
  std::size_t chunk = 256;
  unsigned threads = 0;  // 0: hardware concurrency
};

inline bool pipeline_uses_knockoff(const PipelineSpec& pl) { return pl.name == "knockoff"; }

/// Replicate k draws from RngStream(seed, k).
inline MonteCarloResult run_monte_carlo(const ScenarioSpec& spec, const PipelineSpec& pipeline,
                                        std::size_t reps, std::uint64_t seed,
                                        const MonteCarloOptions& opts = {}) {
  spec.validate();
  if (reps < 100) throw InputError("Monte-Carlo runs need at least 100 replicates");
  if (std::find(pipeline_names().begin(), pipeline_names().end(), pipeline.name) == pipeline_names().end()) {
    throw InputError("unknown pipeline '" + pipeline.name + "'");
  }
  replikit::detail::check_alpha(pipeline.alpha);
  const std::size_t chunk = std::max<std::size_t>(opts.chunk, 1);
  const std::size_t n_chunks = (reps + chunk - 1) / chunk;
  std::vector<MetricAccumulator> parts(n_chunks);

  auto work_chunk = [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(reps, begin + chunk);
    for (std::size_t k = begin; k < end; ++k) {
      stats::RngStream rng(seed, k);
      const auto data = pipeline_uses_knockoff(pipeline) ? generate_knockoff(spec, rng) : generate_pvalues(spec, rng);
      const auto out = run_pipeline(pipeline, spec, data, rng);
      parts[c].add(count_replicate(out, data, pipeline.r), spec.m);
    }
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
  if (threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) work_chunk(c);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t c = t; c < n_chunks; c += threads) work_chunk(c);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  MonteCarloResult res;
  res.replicates = reps;
  res.seed = seed;
  for (const auto& part : parts) res.acc.merge(part);
  return res;
}

inline Estimate run_monte_carlo(const ScenarioSpec& spec, const PipelineSpec& pipeline, Metric metric,
                                std::size_t reps, std::uint64_t seed) {
  return run_monte_carlo(spec, pipeline, reps, seed).get(metric);
}

}  // namespace replikit::sim
