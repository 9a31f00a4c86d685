#pragma once

// JSON forms of two-group models and simulation scenarios (nlohmann::json).
//
// Model:
//   {"n": 2, "prior": [{"state": [0, 0], "mass": 0.9}, {"state": [1, 1], "mass": 0.1}],
//    "mu_pos": 3.0, "mu_neg": [-3.0, -3.0], "var_pos": 1.0, "var_neg": 1.0}
// States not listed have zero mass. Per-study parameters take a number or an array.
//
// Scenario, one of:
//   {"n": 10, "rows": [{"count": 1, "cells": ["zero", {"law": "uniform", "repeat": 9}]}]}
//   {"n": 10, "four_config": {"m": 100, "pi": [0.2, 0.2, 0.1, 0.5], "effect": {"normal": 3}}}
//   {"two_group": <model>, "m": 10000}
// Cell laws are "zero", "uniform" or {"normal": mu}.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "replikit/ebayes.hpp"
#include "replikit/error.hpp"
#include "replikit/sim/scenario.hpp"

namespace replikit::io {

using nlohmann::json;

namespace detail {

inline std::vector<double> per_study(const json& j, const char* key, int n, double fallback) {
  if (!j.contains(key)) return std::vector<double>(n, fallback);
  const auto& v = j.at(key);
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  if (!v.is_array() || v.size() != static_cast<std::size_t>(n)) {
    throw InputError(std::string("model field '") + key + "' must be a number or an array of length n");
  }
  return v.get<std::vector<double>>();
}

inline sim::CellLaw parse_law(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "zero") return sim::CellLaw::zero();
    if (s == "uniform") return sim::CellLaw::uniform();
    throw InputError("unknown cell law '" + s + "'");
  }
  if (j.is_object() && j.contains("normal")) return sim::CellLaw::normal(j.at("normal").get<double>());
  throw InputError("cell law must be \"zero\", \"uniform\" or {\"normal\": mu}");
}

inline json law_to_json(const sim::CellLaw& law) {
  switch (law.kind) {
    case sim::CellLaw::Kind::kZero: return "zero";
    case sim::CellLaw::Kind::kUniform: return "uniform";
    case sim::CellLaw::Kind::kNormal: return json{{"normal", law.mu}};
  }
  return nullptr;
}

}  // namespace detail

inline TwoGroupModel model_from_json(const json& j) {
  try {
    const int n = j.at("n").get<int>();
    TwoGroupModel m = TwoGroupModel::with_means(n, 2.0, -2.0);
    m.prior.assign(state_count(n), 0.0);
    for (const auto& entry : j.at("prior")) {
      const auto h = entry.at("state").get<StateVector>();
      if (h.size() != static_cast<std::size_t>(n)) throw InputError("prior state length differs from n");
      m.prior[encode_state(h)] += entry.at("mass").get<double>();
    }
    m.mu_pos = detail::per_study(j, "mu_pos", n, 2.0);
    m.mu_neg = detail::per_study(j, "mu_neg", n, -2.0);
    m.var_pos = detail::per_study(j, "var_pos", n, 1.0);
    m.var_neg = detail::per_study(j, "var_neg", n, 1.0);
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
}

inline json model_to_json(const TwoGroupModel& m) {
  json prior = json::array();
  for (std::size_t code = 0; code < m.prior.size(); ++code) {
    prior.push_back({{"state", decode_state(code, m.n)}, {"mass", m.prior[code]}});
  }
  return {{"n", m.n},           {"prior", prior},        {"mu_pos", m.mu_pos},
          {"mu_neg", m.mu_neg}, {"var_pos", m.var_pos}, {"var_neg", m.var_neg}};
}

inline sim::ScenarioSpec scenario_from_json(const json& j) {
  try {
    sim::ScenarioSpec s;
    if (j.contains("two_group")) {
      s = sim::ScenarioSpec::from_two_group(model_from_json(j.at("two_group")), j.at("m").get<std::size_t>());
    } else if (j.contains("four_config")) {
      const auto& fc = j.at("four_config");
      const auto pi = fc.at("pi").get<std::array<double, 4>>();
      const auto effect = fc.contains("effect") ? detail::parse_law(fc.at("effect")) : sim::CellLaw::zero();
      s = sim::ScenarioSpec::four_config(fc.at("m").get<std::size_t>(), j.at("n").get<std::size_t>(), pi, effect);
    } else {
      s.n = j.at("n").get<std::size_t>();
      for (const auto& group : j.at("rows")) {
        std::vector<sim::CellLaw> row;
        for (const auto& cell : group.at("cells")) {
          if (cell.is_object() && cell.contains("law")) {
            const auto law = detail::parse_law(cell.at("law"));
            const auto rep = cell.value("repeat", std::size_t{1});
            row.insert(row.end(), rep, law);
          } else {
            row.push_back(detail::parse_law(cell));
          }
        }
        s.add_rows(group.value("count", std::size_t{1}), row);
      }
    }
    s.name = j.value("name", std::string{});
    if (j.contains("m") && !j.contains("two_group") && j.at("m").get<std::size_t>() != s.m) {
      throw InputError("scenario 'm' does not match the rows given");
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scenario JSON: ") + e.what());
  }
}

inline json scenario_to_json(const sim::ScenarioSpec& s) {
  json out{{"name", s.name}, {"m", s.m}, {"n", s.n}};
  if (s.two_group) {
    out["two_group"] = model_to_json(*s.two_group);
    return out;
  }
  // Consecutive identical rows collapse into one group; runs within a row into repeats.
  json rows = json::array();
  std::size_t i = 0;
  while (i < s.m) {
    std::size_t k = i + 1;
    auto same = [&](std::size_t a, std::size_t b) {
      for (std::size_t c = 0; c < s.n; ++c) {
        if (!(s.cell(a, c) == s.cell(b, c))) return false;
      }
      return true;
    };
    while (k < s.m && same(i, k)) ++k;
    json cells = json::array();
    std::size_t c = 0;
    while (c < s.n) {
      std::size_t e = c + 1;
      while (e < s.n && s.cell(i, e) == s.cell(i, c)) ++e;
      cells.push_back({{"law", detail::law_to_json(s.cell(i, c))}, {"repeat", e - c}});
      c = e;
    }
    rows.push_back({{"count", k - i}, {"cells", cells}});
    i = k;
  }
  out["rows"] = rows;
  return out;
}

}  // namespace replikit::io
