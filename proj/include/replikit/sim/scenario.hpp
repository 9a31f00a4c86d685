#pragma once

// Ground-truth scenarios: per-cell laws for p-values (or knockoff statistics) plus an
// optional two-group model that draws hidden states per feature.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "replikit/ebayes.hpp"
#include "replikit/error.hpp"
#include "replikit/matrix.hpp"
#include "replikit/stats/rng.hpp"
#include "replikit/stats/special.hpp"

namespace replikit::sim {

struct CellLaw {
  enum class Kind { kZero, kUniform, kNormal };
  Kind kind = Kind::kUniform;
  double mu = 0.0;  // kNormal only; the sign gives the direction of the effect

  static CellLaw zero() { return {Kind::kZero, 0.0}; }
  static CellLaw uniform() { return {Kind::kUniform, 0.0}; }
  static CellLaw normal(double mu) { return {Kind::kNormal, mu}; }

  // Sign of the true parameter: +1, -1 or 0.
  int sign() const {
    if (kind == Kind::kZero) return 1;
    if (kind == Kind::kNormal) return mu > 0.0 ? 1 : (mu < 0.0 ? -1 : 0);
    return 0;
  }

  bool operator==(const CellLaw&) const = default;
};

struct ScenarioSpec {
  std::string name;
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<CellLaw> cells;                // row-major m x n; unused with a two-group model
  std::optional<TwoGroupModel> two_group;    // draws states per feature when present

  const CellLaw& cell(std::size_t i, std::size_t j) const { return cells[i * n + j]; }

  void validate() const {
    if (m == 0 || n == 0) throw InputError("scenario needs m >= 1 and n >= 1");
    if (two_group) {
      two_group->validate();
      if (static_cast<std::size_t>(two_group->n) != n) throw InputError("two-group model n differs from scenario n");
      return;
    }
    if (cells.size() != m * n) throw InputError("scenario cell laws do not cover every (feature, study)");
  }

  // Appends `count` identical feature rows.
  void add_rows(std::size_t count, const std::vector<CellLaw>& row) {
    if (n == 0) n = row.size();
    if (row.size() != n) throw InputError("scenario row length differs from n");
    for (std::size_t k = 0; k < count; ++k) cells.insert(cells.end(), row.begin(), row.end());
    m += count;
  }

  /// Four archetypes: signal only in study one, only in study two, in every study, nowhere.
  static ScenarioSpec four_config_counts(std::size_t n, const std::array<std::size_t, 4>& counts,
                                         CellLaw effect = CellLaw::zero()) {
    if (n < 2) throw InputError("the four-configuration layout needs n >= 2");
    ScenarioSpec s;
    s.n = n;
    std::vector<CellLaw> row(n, CellLaw::uniform());
    row[0] = effect;
    s.add_rows(counts[0], row);
    row[0] = CellLaw::uniform();
    row[1] = effect;
    s.add_rows(counts[1], row);
    s.add_rows(counts[2], std::vector<CellLaw>(n, effect));
    s.add_rows(counts[3], std::vector<CellLaw>(n, CellLaw::uniform()));
    return s;
  }

  /// Proportions are rounded per configuration; the null configuration absorbs the rest.
  static ScenarioSpec four_config(std::size_t m, std::size_t n, const std::array<double, 4>& pi,
                                  CellLaw effect = CellLaw::zero()) {
    std::array<std::size_t, 4> counts{};
    std::size_t used = 0;
    for (int k = 0; k < 3; ++k) {
      counts[k] = static_cast<std::size_t>(std::llround(pi[k] * static_cast<double>(m)));
      used += counts[k];
    }
    if (used > m) throw InputError("proportions exceed 1");
    counts[3] = m - used;
    return four_config_counts(n, counts, effect);
  }

  static ScenarioSpec from_two_group(const TwoGroupModel& model, std::size_t m) {
    ScenarioSpec s;
    s.m = m;
    s.n = static_cast<std::size_t>(model.n);
    s.two_group = model;
    return s;
  }
};

struct ReplicateData {
  PValueMatrix p;  // right-sided
  ZMatrix z;       // filled for two-group scenarios only
  std::vector<int> n_pos;
  std::vector<int> n_neg;
};

/// Draws right-sided p-values. Point-mass cells are exact zeros; normal cells come from
/// z ~ N(mu, 1) with p = 1 - Phi(z).
inline ReplicateData generate_pvalues(const ScenarioSpec& spec, stats::RngStream& rng) {
  ReplicateData d;
  d.p = PValueMatrix(spec.m, spec.n);
  d.n_pos.assign(spec.m, 0);
  d.n_neg.assign(spec.m, 0);
  if (spec.two_group) {
    auto sample = sample_two_group(*spec.two_group, spec.m, rng);
    for (std::size_t i = 0; i < spec.m; ++i) {
      const auto h = decode_state(sample.states[i], spec.two_group->n);
      for (std::size_t j = 0; j < spec.n; ++j) {
        d.p(i, j) = stats::normal_sf(sample.z(i, j));
        if (h[j] > 0) ++d.n_pos[i];
        if (h[j] < 0) ++d.n_neg[i];
      }
    }
    d.z = std::move(sample.z);
    return d;
  }
  for (std::size_t i = 0; i < spec.m; ++i) {
    for (std::size_t j = 0; j < spec.n; ++j) {
      const auto& law = spec.cell(i, j);
      switch (law.kind) {
        case CellLaw::Kind::kZero: d.p(i, j) = 0.0; break;
        case CellLaw::Kind::kUniform: d.p(i, j) = rng.uniform(); break;
        case CellLaw::Kind::kNormal: d.p(i, j) = stats::normal_sf(law.mu + rng.normal()); break;
      }
      const int s = law.sign();
      if (s > 0) ++d.n_pos[i];
      if (s < 0) ++d.n_neg[i];
    }
  }
  return d;
}

/// Draws knockoff statistics: null cells are sign-symmetric |N(0,1)| draws, normal cells
/// are N(mu, 1), and point-mass cells are strongly positive (3 + |N(0,1)|).
inline ReplicateData generate_knockoff(const ScenarioSpec& spec, stats::RngStream& rng) {
  if (spec.two_group) throw InputError("knockoff scenarios need explicit cell laws");
  ReplicateData d;
  d.p = PValueMatrix(spec.m, spec.n);
  d.n_pos.assign(spec.m, 0);
  d.n_neg.assign(spec.m, 0);
  for (std::size_t i = 0; i < spec.m; ++i) {
    for (std::size_t j = 0; j < spec.n; ++j) {
      const auto& law = spec.cell(i, j);
      double w = 0.0;
      switch (law.kind) {
        case CellLaw::Kind::kZero: w = 3.0 + std::fabs(rng.normal()); break;
        case CellLaw::Kind::kUniform: {
          const double mag = std::fabs(rng.normal());
          w = rng.bernoulli(0.5) ? mag : -mag;
          break;
        }
        case CellLaw::Kind::kNormal: w = law.mu + rng.normal(); break;
      }
      d.p(i, j) = w;
      const int s = law.sign();
      if (s > 0) ++d.n_pos[i];
      if (s < 0) ++d.n_neg[i];
    }
  }
  return d;
}

}  // namespace replikit::sim
