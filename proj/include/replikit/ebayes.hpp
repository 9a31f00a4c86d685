#pragma once

// Empirical-Bayes replicability. Each feature carries a hidden state vector h in
// {-1, 0, +1}^n with prior pi(h); given h_j, the study-j z-score has density f_{j,h_j}.
// The local fdr of a feature is the posterior mass of the r/n null set.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "replikit/base_mt.hpp"
#include "replikit/error.hpp"
#include "replikit/matrix.hpp"
#include "replikit/stats/rng.hpp"
#include "replikit/stats/special.hpp"

namespace replikit {

inline constexpr int kMaxEvalStudies = 12;
inline constexpr int kMaxFitStudies = 5;
inline constexpr double kMinVariance = 1e-6;
inline constexpr double kMinAbsMean = 1e-4;

// State codes are base-3 numbers, study 0 in the lowest digit. Digit 0 is the null state,
// 1 is a positive effect and 2 a negative one.
using StateVector = std::vector<int>;

inline std::size_t state_count(int n) {
  std::size_t k = 1;
  for (int j = 0; j < n; ++j) k *= 3;
  return k;
}

inline int digit_to_state(int digit) { return digit == 0 ? 0 : (digit == 1 ? 1 : -1); }
inline int state_to_digit(int state) { return state == 0 ? 0 : (state > 0 ? 1 : 2); }

inline StateVector decode_state(std::size_t code, int n) {
  StateVector h(n);
  for (int j = 0; j < n; ++j) {
    h[j] = digit_to_state(static_cast<int>(code % 3));
    code /= 3;
  }
  return h;
}

inline std::size_t encode_state(const StateVector& h) {
  std::size_t code = 0;
  for (auto it = h.rbegin(); it != h.rend(); ++it) {
    if (*it < -1 || *it > 1) throw InputError("state entries must be -1, 0 or +1");
    code = code * 3 + static_cast<std::size_t>(state_to_digit(*it));
  }
  return code;
}

// r/n null: fewer than r positive and fewer than r negative entries.
inline bool in_null_set(const StateVector& h, int r) {
  const auto pos = std::count(h.begin(), h.end(), 1);
  const auto neg = std::count(h.begin(), h.end(), -1);
  return pos <= r - 1 && neg <= r - 1;
}

struct TwoGroupModel {
  int n = 0;
  std::vector<double> prior;  // indexed by state code, size 3^n
  std::vector<double> mu_pos, mu_neg, var_pos, var_neg;

  static TwoGroupModel null_only(int n) {
    TwoGroupModel m = with_means(n, 2.0, -2.0);
    m.prior.assign(state_count(n), 0.0);
    m.prior[0] = 1.0;
    return m;
  }

  // Uniform prior; means shared by all studies, unit variances.
  static TwoGroupModel with_means(int n, double mu_pos, double mu_neg) {
    if (n < 1 || n > kMaxEvalStudies) throw InputError("number of studies must lie in 1..12");
    TwoGroupModel m;
    m.n = n;
    m.prior.assign(state_count(n), 1.0 / static_cast<double>(state_count(n)));
    m.mu_pos.assign(n, mu_pos);
    m.mu_neg.assign(n, mu_neg);
    m.var_pos.assign(n, 1.0);
    m.var_neg.assign(n, 1.0);
    return m;
  }

  double prior_of(const StateVector& h) const { return prior.at(encode_state(h)); }
  void set_prior(const StateVector& h, double v) { prior.at(encode_state(h)) = v; }

  void validate() const {
    if (n < 1 || n > kMaxEvalStudies) throw InputError("number of studies must lie in 1..12");
    const std::size_t k = static_cast<std::size_t>(n);
    if (prior.size() != state_count(n) || mu_pos.size() != k || mu_neg.size() != k ||
        var_pos.size() != k || var_neg.size() != k) {
      throw InputError("model parameter sizes do not match the number of studies");
    }
    double total = 0.0;
    for (double v : prior) {
      if (!(v >= 0.0)) throw InputError("prior masses must be non-negative");
      total += v;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw InputError("prior masses must sum to 1");
    for (int j = 0; j < n; ++j) {
      if (!(mu_pos[j] > 0.0) || !(mu_neg[j] < 0.0)) {
        throw InputError("positive-state means must be > 0 and negative-state means < 0");
      }
      if (!(var_pos[j] >= kMinVariance) || !(var_neg[j] >= kMinVariance)) {
        throw InputError("component variances must be at least 1e-6");
      }
    }
  }
};

namespace detail {

inline double log_normal_pdf(double z, double mu, double var) {
  const double d = z - mu;
  return -0.5 * (d * d / var + std::log(2.0 * std::numbers::pi * var));
}

inline double log_sum_exp(const std::vector<double>& v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

// Per-row log joint log pi(h) + sum_j log f_j(z_j | h_j) for every state; -inf where pi(h) = 0.
class StateTable {
 public:
  explicit StateTable(const TwoGroupModel& model) : model_(model), count_(state_count(model.n)) {
    digits_.resize(count_ * model.n);
    for (std::size_t code = 0; code < count_; ++code) {
      std::size_t c = code;
      for (int j = 0; j < model.n; ++j) {
        digits_[code * model.n + j] = static_cast<std::uint8_t>(c % 3);
        c /= 3;
      }
    }
    log_prior_.resize(count_);
    for (std::size_t code = 0; code < count_; ++code) {
      log_prior_[code] = model.prior[code] > 0.0 ? std::log(model.prior[code])
                                                 : -std::numeric_limits<double>::infinity();
    }
  }

  std::size_t count() const { return count_; }
  int digit(std::size_t code, int j) const { return digits_[code * model_.n + j]; }

  void fill(std::span<const double> z, std::vector<double>& out) const {
    const int n = model_.n;
    double lf[kMaxEvalStudies][3];
    for (int j = 0; j < n; ++j) {
      lf[j][0] = log_normal_pdf(z[j], 0.0, 1.0);
      lf[j][1] = log_normal_pdf(z[j], model_.mu_pos[j], model_.var_pos[j]);
      lf[j][2] = log_normal_pdf(z[j], model_.mu_neg[j], model_.var_neg[j]);
    }
    out.resize(count_);
    for (std::size_t code = 0; code < count_; ++code) {
      double s = log_prior_[code];
      if (s != -std::numeric_limits<double>::infinity()) {
        const std::uint8_t* d = &digits_[code * n];
        for (int j = 0; j < n; ++j) s += lf[j][d[j]];
      }
      out[code] = s;
    }
  }

 private:
  const TwoGroupModel& model_;
  std::size_t count_;
  std::vector<std::uint8_t> digits_;
  std::vector<double> log_prior_;
};

}  // namespace detail

/// z = Phi^{-1}(1 - p), so right-sided evidence maps to large positive z. Exact 0 and 1
/// are nudged inward by the smallest usable amount.
inline ZMatrix z_from_pvalues(const PValueMatrix& p) {
  ZMatrix z(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double v = std::clamp(p(i, j), 1e-300, 1.0 - 1e-16);
      z(i, j) = -stats::normal_quantile(v);
    }
  }
  return z;
}

/// Posterior probability of the r/n null set for each feature.
inline std::vector<double> local_fdr(const ZMatrix& z, const TwoGroupModel& model, int r) {
  model.validate();
  if (z.cols() != static_cast<std::size_t>(model.n)) throw InputError("z columns must equal the model's n");
  if (r < 1 || r > model.n) throw InputError("r must satisfy 1 <= r <= n");
  for (double v : z.data()) {
    if (!std::isfinite(v)) throw InputError("z-scores must be finite");
  }
  const detail::StateTable table(model);
  std::vector<bool> null_state(table.count());
  for (std::size_t code = 0; code < table.count(); ++code) {
    null_state[code] = in_null_set(decode_state(code, model.n), r);
  }
  std::vector<double> out(z.rows());
  std::vector<double> joint, num;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    table.fill(z.row(i), joint);
    num.clear();
    for (std::size_t code = 0; code < joint.size(); ++code) {
      if (null_state[code]) num.push_back(joint[code]);
    }
    const double denom = detail::log_sum_exp(joint);
    const double numer = detail::log_sum_exp(num);
    out[i] = numer == -std::numeric_limits<double>::infinity() ? 0.0
                                                               : std::clamp(std::exp(numer - denom), 0.0, 1.0);
  }
  return out;
}

/// Posterior P(at least r positive states) and P(at least r negative states) per feature.
inline std::vector<std::pair<double, double>> replicability_posteriors(const ZMatrix& z,
                                                                       const TwoGroupModel& model, int r) {
  model.validate();
  if (z.cols() != static_cast<std::size_t>(model.n)) throw InputError("z columns must equal the model's n");
  if (r < 1 || r > model.n) throw InputError("r must satisfy 1 <= r <= n");
  const detail::StateTable table(model);
  std::vector<int> kind(table.count(), 0);  // +1 right-replicated, -1 left-replicated, 0 null
  for (std::size_t code = 0; code < table.count(); ++code) {
    const auto h = decode_state(code, model.n);
    if (std::count(h.begin(), h.end(), 1) >= r) kind[code] = 1;
    else if (std::count(h.begin(), h.end(), -1) >= r) kind[code] = -1;
  }
  std::vector<std::pair<double, double>> out(z.rows());
  std::vector<double> joint;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    table.fill(z.row(i), joint);
    const double lse = detail::log_sum_exp(joint);
    double pos = 0.0, neg = 0.0;
    for (std::size_t code = 0; code < joint.size(); ++code) {
      if (kind[code] == 0 || joint[code] == -std::numeric_limits<double>::infinity()) continue;
      (kind[code] > 0 ? pos : neg) += std::exp(joint[code] - lse);
    }
    out[i] = {pos, neg};
  }
  return out;
}

/// Rejects the largest set of smallest-lfdr features whose mean lfdr is at most alpha.
inline std::vector<std::size_t> lfdr_reject(std::span<const double> t, double alpha) {
  detail::check_alpha(alpha);
  const auto order = detail::order_by_pvalue(t);
  std::size_t count = 0;
  // Extended precision keeps ties at exactly alpha (e.g. three values of 0.05) on the
  // accepting side.
  long double sum = 0.0L;
  for (std::size_t k = 0; k < order.size(); ++k) {
    sum += t[order[k]];
    if (sum <= static_cast<long double>(alpha) * static_cast<long double>(k + 1)) count = k + 1;
  }
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(out.begin(), out.end());
  return out;
}

struct EmConfig {
  int max_iter = 1000;
  double tol = 1e-8;  // relative change in log-likelihood
  int restarts = 5;
  std::uint64_t seed = 1;
  bool free_variance = false;
};

struct EmFit {
  TwoGroupModel model;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool monotone = true;
  std::vector<double> trace;  // log-likelihood after each E-step of the winning start
  std::vector<std::string> warnings;
};

namespace detail {

inline TwoGroupModel random_start(int n, stats::RngStream& rng) {
  TwoGroupModel m = TwoGroupModel::with_means(n, 2.0, -2.0);
  double total = 0.0;
  for (auto& v : m.prior) {
    v = 0.05 + rng.uniform();
    total += v;
  }
  // Most features are null in typical data; start with the bulk of the mass there.
  const double rest = 0.2;
  for (auto& v : m.prior) v = rest * v / total;
  m.prior[0] += 1.0 - rest;
  for (int j = 0; j < n; ++j) {
    m.mu_pos[j] = 1.0 + 3.0 * rng.uniform();
    m.mu_neg[j] = -1.0 - 3.0 * rng.uniform();
  }
  return m;
}

// Runs EM from `start`. Log-likelihood sums are accumulated in long double.
inline EmFit run_em(const ZMatrix& z, TwoGroupModel start, const EmConfig& cfg) {
  const int n = start.n;
  const std::size_t m = z.rows();
  const std::size_t k = state_count(n);
  EmFit fit;
  fit.model = std::move(start);
  std::vector<double> joint;
  std::vector<long double> prior_acc(k);
  std::vector<long double> w_pos(n), w_neg(n), s_pos(n), s_neg(n), ss_pos(n), ss_neg(n);
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    const StateTable table(fit.model);
    std::fill(prior_acc.begin(), prior_acc.end(), 0.0L);
    std::fill(w_pos.begin(), w_pos.end(), 0.0L);
    std::fill(w_neg.begin(), w_neg.end(), 0.0L);
    std::fill(s_pos.begin(), s_pos.end(), 0.0L);
    std::fill(s_neg.begin(), s_neg.end(), 0.0L);
    std::fill(ss_pos.begin(), ss_pos.end(), 0.0L);
    std::fill(ss_neg.begin(), ss_neg.end(), 0.0L);
    long double ll = 0.0L;
    double pos_mass[kMaxEvalStudies];
    double neg_mass[kMaxEvalStudies];
    for (std::size_t i = 0; i < m; ++i) {
      const auto zi = z.row(i);
      table.fill(zi, joint);
      const double lse = log_sum_exp(joint);
      ll += lse;
      std::fill(pos_mass, pos_mass + n, 0.0);
      std::fill(neg_mass, neg_mass + n, 0.0);
      for (std::size_t code = 0; code < k; ++code) {
        if (joint[code] == -std::numeric_limits<double>::infinity()) continue;
        const double post = std::exp(joint[code] - lse);
        prior_acc[code] += post;
        for (int j = 0; j < n; ++j) {
          const int d = table.digit(code, j);
          if (d == 1) pos_mass[j] += post;
          else if (d == 2) neg_mass[j] += post;
        }
      }
      for (int j = 0; j < n; ++j) {
        w_pos[j] += pos_mass[j];
        s_pos[j] += pos_mass[j] * zi[j];
        ss_pos[j] += pos_mass[j] * zi[j] * zi[j];
        w_neg[j] += neg_mass[j];
        s_neg[j] += neg_mass[j] * zi[j];
        ss_neg[j] += neg_mass[j] * zi[j] * zi[j];
      }
    }
    const double cur = static_cast<double>(ll);
    if (!std::isfinite(cur)) throw NumericalError("EM log-likelihood is not finite");
    fit.trace.push_back(cur);
    if (cur < prev - 1e-9 * std::fabs(prev)) fit.monotone = false;
    fit.log_likelihood = cur;
    fit.iterations = iter;
    // The likelihood just computed belongs to the current parameters; stop before updating.
    if (iter > 1 && std::fabs(cur - prev) <= cfg.tol * std::fabs(prev)) {
      fit.converged = true;
      break;
    }
    if (iter == cfg.max_iter) break;
    prev = cur;

    long double prior_total = 0.0L;
    for (auto v : prior_acc) prior_total += v;
    for (std::size_t code = 0; code < k; ++code) {
      fit.model.prior[code] = static_cast<double>(prior_acc[code] / prior_total);
    }
    for (int j = 0; j < n; ++j) {
      if (w_pos[j] > 1e-12L) {
        const double mu = std::max(static_cast<double>(s_pos[j] / w_pos[j]), kMinAbsMean);
        fit.model.mu_pos[j] = mu;
        if (cfg.free_variance) {
          const long double var = ss_pos[j] / w_pos[j] - 2.0L * mu * s_pos[j] / w_pos[j] + mu * mu;
          fit.model.var_pos[j] = std::max(static_cast<double>(var), kMinVariance);
        }
      }
      if (w_neg[j] > 1e-12L) {
        const double mu = std::min(static_cast<double>(s_neg[j] / w_neg[j]), -kMinAbsMean);
        fit.model.mu_neg[j] = mu;
        if (cfg.free_variance) {
          const long double var = ss_neg[j] / w_neg[j] - 2.0L * mu * s_neg[j] / w_neg[j] + mu * mu;
          fit.model.var_neg[j] = std::max(static_cast<double>(var), kMinVariance);
        }
      }
    }
  }
  return fit;
}

}  // namespace detail

/// Fits the two-group model by EM on the composite likelihood from `restarts` random
/// starts, keeping the best. Ties keep the earlier start.
inline EmFit fit_two_group_em(const ZMatrix& z, const EmConfig& cfg = {}) {
  const int n = static_cast<int>(z.cols());
  if (n < 1 || n > kMaxFitStudies) throw InputError("EM fitting supports 1..5 studies");
  if (z.rows() == 0) throw InputError("EM fitting needs at least one feature");
  if (cfg.max_iter < 1 || cfg.restarts < 1) throw InputError("max_iter and restarts must be positive");
  for (double v : z.data()) {
    if (!std::isfinite(v)) throw InputError("z-scores must be finite");
  }
  EmFit best;
  for (int s = 0; s < cfg.restarts; ++s) {
    stats::RngStream rng(cfg.seed, static_cast<std::uint64_t>(s));
    auto fit = detail::run_em(z, detail::random_start(n, rng), cfg);
    if (s == 0 || fit.log_likelihood > best.log_likelihood) best = std::move(fit);
  }
  if (z.rows() < 10 * state_count(n)) {
    best.warnings.push_back("fewer than 10 * 3^n features; prior estimates may be unstable");
  }
  if (!best.converged) best.warnings.push_back("EM did not converge within max_iter");
  if (!best.monotone) best.warnings.push_back("log-likelihood decreased during EM");
  return best;
}

/// EM from a caller-supplied starting model (for diagnostics and tests).
inline EmFit fit_two_group_em_from(const ZMatrix& z, const TwoGroupModel& start, const EmConfig& cfg = {}) {
  start.validate();
  if (z.cols() != static_cast<std::size_t>(start.n)) throw InputError("z columns must equal the model's n");
  if (start.n > kMaxFitStudies) throw InputError("EM fitting supports 1..5 studies");
  auto fit = detail::run_em(z, start, cfg);
  if (!fit.converged) fit.warnings.push_back("EM did not converge within max_iter");
  if (!fit.monotone) fit.warnings.push_back("log-likelihood decreased during EM");
  return fit;
}

struct TwoGroupSample {
  ZMatrix z;
  std::vector<std::size_t> states;  // state code per feature
};

/// Draws m features from the model: a state from the prior, then one z per study.
inline TwoGroupSample sample_two_group(const TwoGroupModel& model, std::size_t m, stats::RngStream& rng) {
  model.validate();
  std::vector<double> cdf(model.prior.size());
  std::partial_sum(model.prior.begin(), model.prior.end(), cdf.begin());
  TwoGroupSample out;
  out.z = ZMatrix(m, model.n);
  out.states.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rng.uniform() * cdf.back();
    auto code = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    code = std::min(code, cdf.size() - 1);
    out.states[i] = code;
    std::size_t c = code;
    for (int j = 0; j < model.n; ++j) {
      const int d = static_cast<int>(c % 3);
      c /= 3;
      const double e = rng.normal();
      if (d == 0) out.z(i, j) = e;
      else if (d == 1) out.z(i, j) = model.mu_pos[j] + std::sqrt(model.var_pos[j]) * e;
      else out.z(i, j) = model.mu_neg[j] + std::sqrt(model.var_neg[j]) * e;
    }
  }
  return out;
}

}  // namespace replikit
