#pragma once

// Partial-conjunction (PC) p-values for "fewer than r of n studies carry signal", their
// directional two-sided form, the prefix lower bound on the number of studies with
// signal, and the selection-bias inflation for published-only p-values.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "replikit/error.hpp"
#include "replikit/stats/probability.hpp"
#include "replikit/stats/special.hpp"

namespace replikit {

enum class Direction { kNone, kRight, kLeft };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::kRight: return "right";
    case Direction::kLeft: return "left";
    default: return "none";
  }
}

// Smallest p-value admitted into a logarithm.
inline constexpr double kMinPValue = 1e-300;

// Per-feature study p-values. Left-sided values default to 1 - p; callers with
// discrete statistics pass their own.
class StudyPValues {
 public:
  explicit StudyPValues(std::vector<double> right) : right_(std::move(right)) { validate(right_); }
  StudyPValues(std::vector<double> right, std::vector<double> left)
      : right_(std::move(right)), left_(std::move(left)) {
    validate(right_);
    validate(*left_);
    if (left_->size() != right_.size()) throw InputError("left/right p-value counts differ");
  }

  std::size_t size() const { return right_.size(); }
  std::span<const double> right() const { return right_; }

  std::vector<double> left() const {
    if (left_) return *left_;
    std::vector<double> q(right_.size());
    std::transform(right_.begin(), right_.end(), q.begin(), [](double p) { return 1.0 - p; });
    return q;
  }

  StudyPValues mirrored() const {
    if (left_) return StudyPValues(*left_, right_);
    return StudyPValues(left());
  }

 private:
  static void validate(const std::vector<double>& v) {
    if (v.empty()) throw InputError("at least one study p-value is required");
    for (double p : v) {
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("p-value out of range: " + std::to_string(p));
    }
  }

  std::vector<double> right_;
  std::optional<std::vector<double>> left_;
};

struct PcResult {
  int r = 1;
  Probability pvalue;
  Direction direction = Direction::kNone;
  bool tie = false;  // right and left PC p-values were equal; direction defaulted to right
};

// A combiner maps the ascending-sorted p-values of one feature to its r/n PC p-value.
template <typename C>
concept PcCombiner = requires(const C& c, std::span<const double> sorted, int r) {
  { c.pc_pvalue(sorted, r) } -> std::convertible_to<double>;
};

// Fisher: chi^2 tail of -2 * sum of logs of the n - r + 1 largest p-values.
struct FisherCombiner {
  static constexpr const char* name = "fisher";
  double pc_pvalue(std::span<const double> sorted, int r) const {
    const auto n = static_cast<int>(sorted.size());
    double stat = 0.0;
    for (int j = r - 1; j < n; ++j) stat += std::log(std::max(sorted[j], kMinPValue));
    stat = std::max(-2.0 * stat, 0.0);
    return stats::chi_square_sf(stat, 2 * (n - r + 1));
  }
};

// Stouffer on the same n - r + 1 largest p-values.
struct StoufferCombiner {
  static constexpr const char* name = "stouffer";
  double pc_pvalue(std::span<const double> sorted, int r) const {
    const auto n = static_cast<int>(sorted.size());
    double sum = 0.0;
    for (int j = r - 1; j < n; ++j) {
      const double p = std::clamp(sorted[j], kMinPValue, 1.0 - 1e-16);
      sum -= stats::normal_quantile(p);
    }
    return stats::normal_sf(sum / std::sqrt(static_cast<double>(n - r + 1)));
  }
};

namespace detail {

inline void check_r(int r, std::size_t n) {
  if (r < 1 || static_cast<std::size_t>(r) > n) {
    throw InputError("r must satisfy 1 <= r <= n (r=" + std::to_string(r) +
                     ", n=" + std::to_string(n) + ")");
  }
}

inline std::vector<double> sorted_copy(std::span<const double> p) {
  std::vector<double> s(p.begin(), p.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace detail

template <PcCombiner C = FisherCombiner>
Probability pc_pvalue(std::span<const double> p, int r, const C& combiner = {}) {
  detail::check_r(r, p.size());
  const auto sorted = detail::sorted_copy(p);
  return Probability::clamped(combiner.pc_pvalue(sorted, r));
}

inline Probability fisher_pc_pvalue(std::span<const double> p, int r) {
  return pc_pvalue(p, r, FisherCombiner{});
}

inline Probability fisher_pc_pvalue(const StudyPValues& p, int r) {
  return fisher_pc_pvalue(p.right(), r);
}

// PC p-values for r = 1..n; element k holds r = k + 1.
template <PcCombiner C = FisherCombiner>
std::vector<double> pc_pvalue_profile(std::span<const double> p, const C& combiner = {}) {
  const auto sorted = detail::sorted_copy(p);
  std::vector<double> out(sorted.size());
  for (std::size_t r = 1; r <= sorted.size(); ++r) {
    out[r - 1] = std::clamp(combiner.pc_pvalue(sorted, static_cast<int>(r)), 0.0, 1.0);
  }
  return out;
}

/// Two-sided PC p-value 2 * min(right, left), capped at 1, with the declared direction.
template <PcCombiner C = FisherCombiner>
PcResult directional_pc_pvalue(const StudyPValues& p, int r, const C& combiner = {}) {
  detail::check_r(r, p.size());
  const auto left = p.left();
  const double right_pc = pc_pvalue(p.right(), r, combiner);
  const double left_pc = pc_pvalue(std::span<const double>(left), r, combiner);
  PcResult out;
  out.r = r;
  out.pvalue = Probability::clamped(std::min(1.0, 2.0 * std::min(right_pc, left_pc)));
  out.tie = right_pc == left_pc;
  out.direction = (right_pc <= left_pc) ? Direction::kRight : Direction::kLeft;
  return out;
}

/// Largest l such that the PC p-values for r = 1..l are all <= level (0 if none).
template <PcCombiner C = FisherCombiner>
int prefix_bound(std::span<const double> p, double level, const C& combiner = {}) {
  const auto sorted = detail::sorted_copy(p);
  int bound = 0;
  for (std::size_t r = 1; r <= sorted.size(); ++r) {
    if (combiner.pc_pvalue(sorted, static_cast<int>(r)) <= level) {
      bound = static_cast<int>(r);
    } else {
      break;
    }
  }
  return bound;
}

/// Lower confidence bound on the number of studies with signal, at confidence 1 - alpha.
template <PcCombiner C = FisherCombiner>
int studies_lower_bound(std::span<const double> p, double alpha, const C& combiner = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  return prefix_bound(p, alpha, combiner);
}

/// Inflates a published p-value for selection at `threshold`; nullopt means the study
/// does not enter the combination.
inline std::optional<Probability> selection_bias_adjust(double p, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("threshold must lie in (0,1)");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("p-value out of range: " + std::to_string(p));
  if (p > threshold) return std::nullopt;
  return Probability::clamped(p / threshold);
}

inline std::vector<double> selection_bias_adjust(std::span<const double> p, double threshold) {
  std::vector<double> kept;
  for (double v : p) {
    if (auto adj = selection_bias_adjust(v, threshold)) kept.push_back(*adj);
  }
  return kept;
}

}  // namespace replikit
