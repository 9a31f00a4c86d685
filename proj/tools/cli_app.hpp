#pragma once

// Command-line front end. run_cli is separate from main so tests can drive it in process.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "replikit/io/csv.hpp"
#include "replikit/io/json_io.hpp"
#include "replikit/io/report.hpp"
#include "replikit/replikit.hpp"

namespace replikit::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("REPLI_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::logic_error&) {
      throw InputError("REPLI_SEED must be a non-negative integer");
    }
  }
  return 1;
}

struct CommonOptions {
  std::string input;
  std::string out = "-";
  std::string summary;
  std::string config;
  double alpha = 0.05;
  std::uint64_t seed = 1;
};

struct Outputs {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline std::string fmt(double v) { return io::format_number(v); }

inline std::string join_one_based(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? ";" : "") + std::to_string(idx[k] + 1);
  return s;
}

inline void emit(const io::ReportTable& table, const json& summary, const CommonOptions& common,
                 Outputs& io_streams) {
  if (common.out == "-") {
    io_streams.out << table.to_csv();
  } else {
    table.write(common.out);
  }
  std::string summary_path = common.summary;
  if (summary_path.empty() && common.out != "-") summary_path = common.out + ".json";
  if (!summary_path.empty()) {
    std::ofstream s(summary_path, std::ios::binary);
    if (!s) throw InputError("cannot write '" + summary_path + "'");
    s << summary.dump(2) << '\n';
  }
}

// Options missing from the command line take their value from the JSON config file.
inline void apply_config(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  json cfg;
  try {
    cfg = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw InputError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw InputError("config '" + path + "' must hold a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr) throw InputError("config key '" + key + "' is not an option of '" + sub.get_name() + "'");
    if (opt->count() > 0) continue;
    std::string text;
    if (value.is_string()) text = value.get<std::string>();
    else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
    else text = value.dump();
    opt->clear();
    opt->add_result(text);
    opt->run_callback();
  }
}

inline json common_json(const CommonOptions& c) {
  return {{"input", c.input}, {"alpha", c.alpha}, {"seed", c.seed}};
}

inline void add_common(CLI::App* sub, CommonOptions& c, bool needs_input = true) {
  auto* in = sub->add_option("-i,--input", c.input, "Input CSV (header row, feature id first)");
  if (needs_input) in->required();
  sub->add_option("-o,--out", c.out, "Report CSV path, '-' for stdout")->capture_default_str();
  sub->add_option("--summary", c.summary, "JSON summary path (default: <out>.json when --out is a file)");
  sub->add_option("--config", c.config, "JSON file of option values; command-line flags win");
  sub->add_option("--alpha", c.alpha, "Target error level")->capture_default_str();
  sub->add_option("--seed", c.seed, "Random seed (default from REPLI_SEED, else 1)");
}

inline PValueMatrix read_left(const std::string& path, const io::InputTable& right) {
  auto q = io::read_table(path, io::CellMode::kPValue);
  if (q.ids != right.ids || q.values.cols() != right.values.cols()) {
    throw InputError("left-sided p-value table must match the input's features and studies");
  }
  return q.values;
}

}  // namespace detail

// ---- pc ----

struct PcOptions {
  CommonOptions common;
  int r = 2;
  std::string combiner = "fisher";
  bool two_sided = false;
  std::string left;
  double bias_threshold = 0.0;
};

inline int run_pc(const PcOptions& o, Outputs& os) {
  const auto table = io::read_table(o.common.input, io::CellMode::kPValue);
  const auto& p = table.values;
  const auto q = o.left.empty() ? left_sided(p) : detail::read_left(o.left, table);
  if (o.combiner != "fisher" && o.combiner != "stouffer") throw InputError("combiner must be fisher or stouffer");
  replikit::detail::check_alpha(o.common.alpha);
  const bool biased = o.bias_threshold > 0.0;

  auto pc_of = [&](std::vector<double> v) -> double {
    if (biased) v = selection_bias_adjust(v, o.bias_threshold);
    if (static_cast<int>(v.size()) < o.r) return 1.0;
    return o.combiner == "fisher" ? pc_pvalue(v, o.r, FisherCombiner{}).value()
                                  : pc_pvalue(v, o.r, StoufferCombiner{}).value();
  };
  auto bound_of = [&](std::vector<double> v) {
    if (biased) v = selection_bias_adjust(v, o.bias_threshold);
    return o.combiner == "fisher" ? prefix_bound(v, o.common.alpha, FisherCombiner{})
                                  : prefix_bound(v, o.common.alpha, StoufferCombiner{});
  };

  const std::size_t m = p.rows();
  if (m > 0) replikit::detail::check_r(o.r, p.cols());
  std::vector<double> pc(m);
  std::vector<std::string> dir(m, "right");
  std::vector<int> bound(m);
  std::vector<bool> tie(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> right(p.row(i).begin(), p.row(i).end());
    if (o.two_sided) {
      std::vector<double> left(q.row(i).begin(), q.row(i).end());
      const double pr = pc_of(right);
      const double pl = pc_of(left);
      pc[i] = std::min(1.0, 2.0 * std::min(pr, pl));
      tie[i] = pr == pl;
      dir[i] = pr <= pl ? "right" : "left";
      bound[i] = bound_of(pr <= pl ? right : left);
    } else {
      pc[i] = pc_of(right);
      bound[i] = bound_of(right);
    }
  }
  const auto adj = bh(pc, o.common.alpha);
  io::ReportTable rep({"feature", "pc_pvalue", "bh_adjusted", "decision", "direction", "tie", "bound"});
  std::vector<bool> rejected(m, false);
  for (auto i : adj.rejected) rejected[i] = true;
  for (std::size_t i = 0; i < m; ++i) {
    rep.add_row({table.ids[i], detail::fmt(pc[i]), detail::fmt(adj.adjusted[i]), rejected[i] ? "replicated" : "not_replicated",
                 dir[i], tie[i] ? "1" : "0", std::to_string(bound[i])});
  }
  json summary = detail::common_json(o.common);
  summary["command"] = "pc";
  summary["r"] = o.r;
  summary["combiner"] = o.combiner;
  summary["two_sided"] = o.two_sided;
  summary["bias_threshold"] = o.bias_threshold;
  summary["features"] = m;
  summary["replicated"] = adj.rejected.size();
  detail::emit(rep, summary, o.common, os);
  return kExitOk;
}

// ---- screen ----

struct ScreenOptions {
  CommonOptions common;
  std::string rate = "fdr";
  std::string base = "bonferroni";
  std::string select1;
  std::string select2;
  bool two_sided = false;
  std::string left;
  std::string grouping;
  bool plugin = false;
  double lambda = 0.5;
};

inline int run_screen(const ScreenOptions& o, Outputs& os) {
  const auto table = io::read_table(o.common.input, io::CellMode::kPValue);
  const auto& p = table.values;
  const auto q = o.left.empty() ? left_sided(p) : detail::read_left(o.left, table);
  CrossScreenConfig cfg;
  if (o.rate == "fwer") cfg.error_rate = ScreenErrorRate::kFwer;
  else if (o.rate != "fdr") throw InputError("rate must be fwer or fdr");
  if (o.base == "holm") cfg.base = FwerBase::kHolm;
  else if (o.base != "bonferroni") throw InputError("base must be bonferroni or holm");
  cfg.alpha = o.common.alpha;
  cfg.rule1 = o.select1.empty() ? SelectionRule::bh_level(o.common.alpha) : SelectionRule::parse(o.select1);
  cfg.rule2 = o.select2.empty() ? cfg.rule1 : SelectionRule::parse(o.select2);
  cfg.two_sided = o.two_sided;
  cfg.plugin = o.plugin;
  cfg.lambda = o.lambda;

  CrossScreenReport report;
  if (!o.grouping.empty()) {
    report = grouped_generalization(p, q, StudyGrouping::parse(o.grouping), cfg);
  } else {
    if (p.cols() != 2) throw InputError("screen needs exactly 2 study columns, or --grouping for more");
    TwoStudyPValues in{p.column(0), q.column(0), p.column(1), q.column(1)};
    report = cross_screen(in, cfg);
  }
  io::ReportTable rep({"feature", "p1_prime", "p2_prime", "adjusted_bon", "adjusted_bh", "decision", "direction"});
  for (const auto& c : report.candidates) {
    rep.add_row({table.ids[c.feature], detail::fmt(c.p1_prime), detail::fmt(c.p2_prime), detail::fmt(c.adjusted_bon),
                 detail::fmt(c.adjusted_bh), c.replicated ? "replicated" : "not_replicated", to_string(c.direction)});
  }
  json summary = detail::common_json(o.common);
  summary["command"] = "screen";
  summary["rate"] = o.rate;
  summary["base"] = o.base;
  summary["selection1"] = cfg.rule1.describe();
  summary["selection2"] = cfg.rule2.describe();
  summary["two_sided"] = o.two_sided;
  summary["plugin"] = o.plugin;
  summary["grouping"] = report.grouping;
  summary["selected1"] = report.selected1.size();
  summary["selected2"] = report.selected2.size();
  summary["candidates"] = report.candidates.size();
  summary["replicated"] = report.replicated.size();
  summary["family_size1"] = report.family_size1;
  summary["family_size2"] = report.family_size2;
  detail::emit(rep, summary, o.common, os);
  return kExitOk;
}

// ---- bounds ----

struct BoundsOptionsCli {
  CommonOptions common;
  std::string procedure = "proc3";
  std::string select;        // proc4 rule applied to one study, e.g. "p:0.001"
  int select_study = 1;      // one-based
  bool arbitrary_dependence = false;
};

inline int run_bounds(const BoundsOptionsCli& o, Outputs& os) {
  const auto table = io::read_table(o.common.input, io::CellMode::kPValue);
  const auto& p = table.values;
  BoundsOptions bo;
  bo.arbitrary_dependence = o.arbitrary_dependence;
  BoundsReport report;
  std::string selection = "bh on global-null p-values";
  if (o.procedure == "proc3") {
    report = proc3_bhy(p, o.common.alpha, FisherCombiner{}, bo);
  } else if (o.procedure == "proc4") {
    if (o.select_study < 1 || static_cast<std::size_t>(o.select_study) > p.cols()) {
      throw InputError("--select-study is out of range");
    }
    const auto col = p.column(o.select_study - 1);
    std::vector<std::size_t> sel;
    if (o.select.empty()) {
      sel = bonferroni(col, o.common.alpha).rejected;
      selection = "bonferroni on study " + std::to_string(o.select_study);
    } else {
      const auto rule = SelectionRule::parse(o.select);
      sel = rule.apply(col);
      selection = rule.describe() + " on study " + std::to_string(o.select_study);
    }
    report = proc4_selected(p, sel, o.common.alpha, FisherCombiner{}, bo);
  } else {
    throw InputError("procedure must be proc3 or proc4");
  }
  io::ReportTable rep({"feature", "bound", "level"});
  for (std::size_t k = 0; k < report.selected.size(); ++k) {
    rep.add_row({table.ids[report.selected[k]], std::to_string(report.bounds[k]), detail::fmt(report.level_used)});
  }
  json summary = detail::common_json(o.common);
  summary["command"] = "bounds";
  summary["procedure"] = o.procedure;
  summary["selection"] = selection;
  summary["arbitrary_dependence"] = o.arbitrary_dependence;
  summary["selected"] = report.selected.size();
  summary["level_used"] = report.level_used;
  detail::emit(rep, summary, o.common, os);
  return kExitOk;
}

// ---- adafilter ----

struct AdaFilterOptions {
  CommonOptions common;
  int r = 2;
  std::string variant = "bh";
  bool two_sided = false;
  std::string left;
};

inline int run_adafilter(const AdaFilterOptions& o, Outputs& os) {
  const auto table = io::read_table(o.common.input, io::CellMode::kPValue);
  const auto& p = table.values;
  const auto variant = parse_adafilter_variant(o.variant);
  const std::size_t m = p.rows();
  io::ReportTable rep({"feature", "filter_stat", "selection_stat", "adjusted_bon", "adjusted_bh", "decision", "direction"});
  json summary = detail::common_json(o.common);
  summary["command"] = "adafilter";
  summary["r"] = o.r;
  summary["variant"] = o.variant;
  summary["two_sided"] = o.two_sided;
  if (m == 0) {
    detail::emit(rep, summary, o.common, os);
    return kExitOk;
  }
  if (!o.two_sided) {
    const auto st = adafilter_stats(p, o.r);
    const auto adj = adafilter_adjusted(st);
    const auto rej = adafilter_reject(st, o.common.alpha, variant);
    std::vector<bool> is_rej(m, false);
    for (auto i : rej) is_rej[i] = true;
    for (std::size_t i = 0; i < m; ++i) {
      rep.add_row({table.ids[i], detail::fmt(st.filter[i]), detail::fmt(st.selection[i]), detail::fmt(adj.bon[i]),
                   detail::fmt(adj.bh[i]), is_rej[i] ? "replicated" : "not_replicated", is_rej[i] ? "right" : "none"});
    }
    summary["replicated"] = rej.size();
  } else {
    const auto q = o.left.empty() ? left_sided(p) : detail::read_left(o.left, table);
    const auto res = directional_adafilter(p, q, o.r, o.common.alpha, variant);
    const auto st_r = adafilter_stats(p, o.r);
    const auto st_l = adafilter_stats(q, o.r);
    const auto adj_r = adafilter_adjusted(st_r);
    const auto adj_l = adafilter_adjusted(st_l);
    std::vector<std::string> status(m, "none");
    for (auto i : res.right) status[i] = "right";
    for (auto i : res.left) status[i] = "left";
    for (auto i : res.conflicts) status[i] = "conflict";
    for (std::size_t i = 0; i < m; ++i) {
      // Report the side with the smaller selection statistic; adjusted values are doubled
      // to match the alpha / 2 per side.
      const bool use_left = st_l.selection[i] < st_r.selection[i];
      const auto& st = use_left ? st_l : st_r;
      const auto& adj = use_left ? adj_l : adj_r;
      const bool claimed = status[i] == "right" || status[i] == "left";
      rep.add_row({table.ids[i], detail::fmt(st.filter[i]), detail::fmt(st.selection[i]),
                   detail::fmt(std::min(1.0, 2.0 * adj.bon[i])), detail::fmt(std::min(1.0, 2.0 * adj.bh[i])),
                   claimed ? "replicated" : (status[i] == "conflict" ? "conflict" : "not_replicated"), status[i]});
    }
    summary["replicated_right"] = res.right.size();
    summary["replicated_left"] = res.left.size();
    summary["conflicts"] = res.conflicts.size();
    if (!res.conflicts.empty()) {
      os.err << "warning: " << res.conflicts.size() << " feature(s) rejected in both directions: "
             << detail::join_one_based(res.conflicts) << '\n';
    }
  }
  detail::emit(rep, summary, o.common, os);
  return kExitOk;
}

// ---- knockoff ----

struct KnockoffOptions {
  CommonOptions common;
  int r = 2;
  double c = 0.5;
};

inline int run_knockoff(const KnockoffOptions& o, Outputs& os) {
  const auto table = io::read_table(o.common.input, io::CellMode::kReal);
  KnockoffConfig cfg;
  cfg.r = o.r;
  cfg.alpha = o.common.alpha;
  cfg.c = o.c;
  stats::RngStream rng(o.common.seed, 0);
  io::ReportTable rep({"feature", "pc_pvalue", "magnitude", "decision"});
  json summary = detail::common_json(o.common);
  summary["command"] = "knockoff";
  summary["r"] = o.r;
  if (table.values.rows() > 0) {
    const auto res = knockoff_filter(table.values, cfg, rng);
    std::vector<bool> is_rej(table.values.rows(), false);
    for (auto i : res.rejected) is_rej[i] = true;
    for (std::size_t i = 0; i < table.values.rows(); ++i) {
      rep.add_row({table.ids[i], detail::fmt(res.pvalues[i]), detail::fmt(res.magnitudes[i]),
                   is_rej[i] ? "replicated" : "not_replicated"});
    }
    summary["c"] = res.c_used;
    summary["threshold"] = detail::fmt(res.threshold);
    summary["replicated"] = res.rejected.size();
  }
  detail::emit(rep, summary, o.common, os);
  return kExitOk;
}

// ---- ebayes ----

struct EbayesOptions {
  CommonOptions common;
  int r = 2;
  bool z_input = false;
  std::string model;
  std::string model_out;
  int restarts = 5;
  int max_iter = 1000;
  double tol = 1e-8;
  bool free_variance = false;
  bool allow_warn = false;
};

inline int run_ebayes(const EbayesOptions& o, Outputs& os) {
  const auto table = io::read_table(o.common.input, o.z_input ? io::CellMode::kReal : io::CellMode::kPValue);
  const ZMatrix z = o.z_input ? table.values : z_from_pvalues(table.values);
  json summary = detail::common_json(o.common);
  summary["command"] = "ebayes";
  summary["r"] = o.r;
  TwoGroupModel model;
  bool warned = false;
  if (!o.model.empty()) {
    try {
      model = io::model_from_json(json::parse(io::read_file(o.model)));
    } catch (const json::exception& e) {
      throw InputError("model '" + o.model + "' is not valid JSON: " + e.what());
    }
    summary["model_source"] = o.model;
  } else {
    EmConfig cfg;
    cfg.restarts = o.restarts;
    cfg.max_iter = o.max_iter;
    cfg.tol = o.tol;
    cfg.seed = o.common.seed;
    cfg.free_variance = o.free_variance;
    auto fit = fit_two_group_em(z, cfg);
    for (const auto& w : fit.warnings) os.err << "warning: " << w << '\n';
    summary["model_source"] = "em";
    summary["em"] = {{"log_likelihood", fit.log_likelihood},
                     {"iterations", fit.iterations},
                     {"converged", fit.converged},
                     {"warnings", fit.warnings}};
    warned = !fit.converged || !fit.monotone;
    model = std::move(fit.model);
  }
  if (warned && !o.allow_warn) {
    throw NumericalError("EM did not converge cleanly; rerun with --allow-warn to accept the fit");
  }
  const auto t = local_fdr(z, model, o.r);
  const auto post = replicability_posteriors(z, model, o.r);
  const auto rej = lfdr_reject(t, o.common.alpha);
  std::vector<bool> is_rej(t.size(), false);
  for (auto i : rej) is_rej[i] = true;
  io::ReportTable rep({"feature", "lfdr", "decision", "direction"});
  for (std::size_t i = 0; i < t.size(); ++i) {
    const char* dir = !is_rej[i] ? "none" : (post[i].first >= post[i].second ? "right" : "left");
    rep.add_row({table.ids[i], detail::fmt(t[i]), is_rej[i] ? "replicated" : "not_replicated", dir});
  }
  summary["model"] = io::model_to_json(model);
  summary["replicated"] = rej.size();
  if (!o.model_out.empty()) {
    std::ofstream mo(o.model_out, std::ios::binary);
    if (!mo) throw InputError("cannot write '" + o.model_out + "'");
    mo << io::model_to_json(model).dump(2) << '\n';
  }
  detail::emit(rep, summary, o.common, os);
  return kExitOk;
}

// ---- simulate ----

struct SimulateOptions {
  CommonOptions common;
  std::string scenario;
  std::string pipeline = "naive";
  int r = 2;
  std::size_t reps = 10000;
  std::string within = "bonferroni";
  bool pairwise = false;
  bool two_sided = false;
  std::string rate = "fdr";
  std::string base = "bonferroni";
  std::string grouping;
  double c = 0.5;
};

inline int run_simulate(const SimulateOptions& o, Outputs& os) {
  json sj;
  try {
    sj = json::parse(io::read_file(o.scenario));
  } catch (const json::exception& e) {
    throw InputError("scenario '" + o.scenario + "' is not valid JSON: " + e.what());
  }
  const auto spec = io::scenario_from_json(sj);
  sim::PipelineSpec pl;
  pl.name = o.pipeline;
  pl.r = o.r;
  pl.alpha = o.common.alpha;
  pl.within = parse_procedure(o.within);
  pl.pairwise = o.pairwise;
  pl.two_sided = o.two_sided;
  if (o.rate == "fwer") pl.screen_rate = ScreenErrorRate::kFwer;
  else if (o.rate != "fdr") throw InputError("rate must be fwer or fdr");
  if (o.base == "holm") pl.screen_base = FwerBase::kHolm;
  else if (o.base != "bonferroni") throw InputError("base must be bonferroni or holm");
  pl.grouping = o.grouping;
  pl.c = o.c;
  const auto res = sim::run_monte_carlo(spec, pl, o.reps, o.common.seed);
  io::ReportTable rep({"metric", "estimate", "std_error", "replicates"});
  json metrics = json::object();
  for (auto m : sim::kAllMetrics) {
    const auto e = res.get(m);
    rep.add_row({sim::to_string(m), detail::fmt(e.estimate), detail::fmt(e.std_error), std::to_string(e.count)});
    metrics[sim::to_string(m)] = {{"estimate", e.estimate}, {"std_error", e.std_error}, {"replicates", e.count}};
  }
  json summary = {{"command", "simulate"}, {"scenario", o.scenario},   {"pipeline", o.pipeline},
                  {"r", o.r},              {"alpha", o.common.alpha}, {"reps", o.reps},
                  {"seed", o.common.seed}, {"m", spec.m},             {"n", spec.n},
                  {"metrics", metrics}};
  detail::emit(rep, summary, o.common, os);
  return kExitOk;
}

// ---- analytic ----

struct AnalyticOptions {
  CommonOptions common;
  std::string example;
  double m = 100;
  double n = 10;
  std::vector<double> pi;
  double mu = 2.0;
  double pi00 = 0.85, pi10 = 0.1, pi01 = 0.05;
};

inline int run_analytic(const AnalyticOptions& o, Outputs& os) {
  io::ReportTable rep({"quantity", "value"});
  const double alpha = o.common.alpha;
  if (o.example == "naive") {
    rep.add_row({"naive_binomial_bound", detail::fmt(sim::naive_binomial_bound(static_cast<int>(o.n), alpha))});
  } else if (o.example == "naive_single") {
    rep.add_row({"naive_single_strong_bound", detail::fmt(sim::naive_single_strong_bound(static_cast<int>(o.n), alpha))});
  } else if (o.example == "ex2") {
    rep.add_row({"fwer", detail::fmt(sim::analytic_example2(o.m, o.n, alpha))});
  } else if (o.example == "ex3") {
    const auto r3 = sim::analytic_example3(o.pi00, o.pi10, o.pi01, alpha, o.m);
    rep.add_row({"u1", detail::fmt(r3.u1)});
    rep.add_row({"u2", detail::fmt(r3.u2)});
    rep.add_row({"fdr", detail::fmt(r3.fdr)});
  } else {
    const auto id = sim::parse_appendix_example(o.example);
    sim::AppendixParams ap;
    ap.m = o.m;
    ap.n = o.n;
    ap.alpha = alpha;
    ap.mu = o.mu;
    if (!o.pi.empty()) {
      if (o.pi.size() != 4) throw InputError("--pi takes four proportions");
      for (int k = 0; k < 4; ++k) ap.pi[k] = o.pi[k];
    }
    rep.add_row({"fwer", detail::fmt(sim::analytic_appendix(id, ap))});
  }
  json summary = {{"command", "analytic"}, {"example", o.example}, {"m", o.m},
                  {"n", o.n},              {"alpha", alpha},       {"mu", o.mu}};
  if (!o.pi.empty()) summary["pi"] = o.pi;
  detail::emit(rep, summary, o.common, os);
  return kExitOk;
}

/// Parses and runs one subcommand. Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Outputs os{out, err};
  CLI::App app{"Replicability analysis across multiple studies"};
  app.require_subcommand(1);

  PcOptions pc;
  ScreenOptions screen;
  BoundsOptionsCli bounds;
  AdaFilterOptions ada;
  KnockoffOptions ko;
  EbayesOptions eb;
  SimulateOptions simo;
  AnalyticOptions an;
  try {
    const auto seed = default_seed();
    for (auto* c : {&pc.common, &screen.common, &bounds.common, &ada.common, &ko.common, &eb.common, &simo.common,
                    &an.common}) {
      c->seed = seed;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  auto* s_pc = app.add_subcommand("pc", "Partial-conjunction p-values and study-count bounds per feature");
  detail::add_common(s_pc, pc.common);
  s_pc->add_option("--r", pc.r, "Replicability threshold r")->capture_default_str();
  s_pc->add_option("--combiner", pc.combiner, "fisher or stouffer")->capture_default_str();
  s_pc->add_flag("--two-sided", pc.two_sided, "Directional two-sided analysis");
  s_pc->add_option("--left", pc.left, "CSV of explicit left-sided p-values");
  s_pc->add_option("--bias-threshold", pc.bias_threshold, "Publication threshold for selection-bias adjustment");

  auto* s_screen = app.add_subcommand("screen", "Cross-screening for replicability in two studies or two groups");
  detail::add_common(s_screen, screen.common);
  s_screen->add_option("--rate", screen.rate, "fwer or fdr")->capture_default_str();
  s_screen->add_option("--base", screen.base, "FWER base: bonferroni or holm")->capture_default_str();
  s_screen->add_option("--select", screen.select1, "Selection rule for study one (bh:L, p:T, top:K)");
  s_screen->add_option("--select2", screen.select2, "Selection rule for study two (default: same as --select)");
  s_screen->add_flag("--two-sided", screen.two_sided, "Directional two-sided analysis");
  s_screen->add_option("--left", screen.left, "CSV of explicit left-sided p-values");
  s_screen->add_option("--grouping", screen.grouping, "Study groups, e.g. '1,2;3,4'");
  s_screen->add_flag("--plugin", screen.plugin, "Scale family sizes by a null-proportion estimate (experimental)");
  s_screen->add_option("--lambda", screen.lambda, "Null-proportion tuning parameter")->capture_default_str();

  auto* s_bounds = app.add_subcommand("bounds", "FCR-controlled lower bounds on the number of studies with signal");
  detail::add_common(s_bounds, bounds.common);
  s_bounds->add_option("--procedure", bounds.procedure, "proc3 (BH selection) or proc4 (external selection)")
      ->capture_default_str();
  s_bounds->add_option("--select", bounds.select, "proc4 selection rule on one study (default Bonferroni)");
  s_bounds->add_option("--select-study", bounds.select_study, "proc4: one-based study used for selection")
      ->capture_default_str();
  s_bounds->add_flag("--arbitrary-dependence", bounds.arbitrary_dependence,
                     "Harmonic-number correction for dependence (experimental)");

  auto* s_ada = app.add_subcommand("adafilter", "AdaFilter Bonferroni / BH for r/n replicability");
  detail::add_common(s_ada, ada.common);
  s_ada->add_option("--r", ada.r, "Replicability threshold r")->capture_default_str();
  s_ada->add_option("--variant", ada.variant, "bonferroni or bh")->capture_default_str();
  s_ada->add_flag("--two-sided", ada.two_sided, "Run each direction at alpha/2");
  s_ada->add_option("--left", ada.left, "CSV of explicit left-sided p-values");

  auto* s_ko = app.add_subcommand("knockoff", "Replicability filter on multi-environment knockoff statistics");
  detail::add_common(s_ko, ko.common);
  s_ko->add_option("--r", ko.r, "Replicability threshold r")->capture_default_str();
  s_ko->add_option("--c", ko.c, "SeqStep+ p-value cutoff (forced to 0.5 when r = n)")->capture_default_str();

  auto* s_eb = app.add_subcommand("ebayes", "Empirical-Bayes local fdr for r/n replicability");
  detail::add_common(s_eb, eb.common);
  s_eb->add_option("--r", eb.r, "Replicability threshold r")->capture_default_str();
  s_eb->add_flag("--z", eb.z_input, "Input cells are z-scores instead of p-values");
  s_eb->add_option("--model", eb.model, "Model JSON to use instead of fitting");
  s_eb->add_option("--model-out", eb.model_out, "Write the fitted model JSON here");
  s_eb->add_option("--restarts", eb.restarts, "EM random restarts")->capture_default_str();
  s_eb->add_option("--max-iter", eb.max_iter, "EM iteration cap")->capture_default_str();
  s_eb->add_option("--tol", eb.tol, "EM relative log-likelihood tolerance")->capture_default_str();
  s_eb->add_flag("--free-variance", eb.free_variance, "Estimate component variances");
  s_eb->add_flag("--allow-warn", eb.allow_warn, "Accept a fit that raised convergence warnings");

  auto* s_sim = app.add_subcommand("simulate", "Monte-Carlo error rates of a pipeline on a scenario");
  detail::add_common(s_sim, simo.common, false);
  s_sim->add_option("--scenario", simo.scenario, "Scenario JSON")->required();
  s_sim->add_option("--pipeline", simo.pipeline, "Pipeline name")->capture_default_str();
  s_sim->add_option("--r", simo.r, "Replicability threshold r")->capture_default_str();
  s_sim->add_option("--reps", simo.reps, "Replicates")->capture_default_str();
  s_sim->add_option("--within", simo.within, "naive: per-study procedure")->capture_default_str();
  s_sim->add_flag("--pairwise", simo.pairwise, "naive: claim on any two studies");
  s_sim->add_flag("--two-sided", simo.two_sided, "Directional pipelines");
  s_sim->add_option("--rate", simo.rate, "cross_screen: fwer or fdr")->capture_default_str();
  s_sim->add_option("--base", simo.base, "cross_screen: bonferroni or holm")->capture_default_str();
  s_sim->add_option("--grouping", simo.grouping, "cross_screen: study groups");
  s_sim->add_option("--c", simo.c, "knockoff: SeqStep+ cutoff")->capture_default_str();

  auto* s_an = app.add_subcommand("analytic", "Closed-form error rates of the naive approach");
  detail::add_common(s_an, an.common, false);
  s_an->add_option("--example", an.example, "naive, naive_single, ex2, ex3, A1..A6, A6_pairwise, ...")->required();
  s_an->add_option("--m", an.m, "Number of features")->capture_default_str();
  s_an->add_option("--n", an.n, "Number of studies")->capture_default_str();
  s_an->add_option("--pi", an.pi, "Configuration shares (four values)")->delimiter(',');
  s_an->add_option("--mu", an.mu, "Normal effect size")->capture_default_str();
  s_an->add_option("--pi00", an.pi00, "ex3: share null in both studies")->capture_default_str();
  s_an->add_option("--pi10", an.pi10, "ex3: share with signal only in study one")->capture_default_str();
  s_an->add_option("--pi01", an.pi01, "ex3: share with signal only in study two")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (s_pc->parsed()) {
      detail::apply_config(*s_pc, pc.common.config);
      return run_pc(pc, os);
    }
    if (s_screen->parsed()) {
      detail::apply_config(*s_screen, screen.common.config);
      return run_screen(screen, os);
    }
    if (s_bounds->parsed()) {
      detail::apply_config(*s_bounds, bounds.common.config);
      return run_bounds(bounds, os);
    }
    if (s_ada->parsed()) {
      detail::apply_config(*s_ada, ada.common.config);
      return run_adafilter(ada, os);
    }
    if (s_ko->parsed()) {
      detail::apply_config(*s_ko, ko.common.config);
      return run_knockoff(ko, os);
    }
    if (s_eb->parsed()) {
      detail::apply_config(*s_eb, eb.common.config);
      return run_ebayes(eb, os);
    }
    if (s_sim->parsed()) {
      detail::apply_config(*s_sim, simo.common.config);
      return run_simulate(simo, os);
    }
    if (s_an->parsed()) {
      detail::apply_config(*s_an, an.common.config);
      return run_analytic(an, os);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace replikit::cli
