#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "replikit/io/csv.hpp"
#include "replikit/io/json_io.hpp"
#include "replikit/io/report.hpp"

using namespace replikit;
using namespace replikit::io;

namespace {

std::string error_of(const std::string& text, CellMode mode = CellMode::kPValue) {
  try {
    parse_table(text, mode);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST(Csv, QuotedFieldsAndLineEndings) {
  const auto recs = parse_csv("id,a\r\n\"x,1\",0.5\r\n\"say \"\"hi\"\"\",0.25\n\n\"multi\nline\",1\n");
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[1].fields[0], "x,1");
  EXPECT_EQ(recs[2].fields[0], "say \"hi\"");
  EXPECT_EQ(recs[3].fields[0], "multi\nline");
  EXPECT_EQ(recs[1].line, 2u);
  EXPECT_EQ(recs[3].line, 5u);
}

TEST(Csv, NoTrailingNewlineAndEmptyFields) {
  const auto recs = parse_csv("a,b\n1,");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].fields, (std::vector<std::string>{"1", ""}));
}

TEST(Csv, MalformedQuotesNameTheLine) {
  EXPECT_TRUE(contains(error_of("id,a\nx,\"0.5\n"), "line 2"));
  EXPECT_TRUE(contains(error_of("id,a\nx,0\"5\n"), "line 2"));
  EXPECT_TRUE(contains(error_of("id,a\nx,0.1\ny,\"0.5\"z\n"), "line 3"));
}

TEST(Table, ParsesValues) {
  const auto t = parse_table("feature,s1,s2\ng1,0.01,0.2\ng2,1,0\n", CellMode::kPValue);
  EXPECT_EQ(t.ids, (std::vector<std::string>{"g1", "g2"}));
  EXPECT_EQ(t.study_names(), (std::vector<std::string>{"s1", "s2"}));
  ASSERT_EQ(t.values.rows(), 2u);
  EXPECT_DOUBLE_EQ(t.values(0, 1), 0.2);
  EXPECT_DOUBLE_EQ(t.values(1, 0), 1.0);

  const auto header_only = parse_table("feature,s1\n", CellMode::kPValue);
  EXPECT_EQ(header_only.values.rows(), 0u);
  EXPECT_EQ(header_only.values.cols(), 1u);
}

TEST(Table, Diagnostics) {
  EXPECT_TRUE(contains(error_of(""), "header"));
  EXPECT_TRUE(contains(error_of("feature\n"), "line 1"));
  const auto ragged = error_of("id,a,b\nx,0.1,0.2\ny,0.3\n");
  EXPECT_TRUE(contains(ragged, "line 3"));
  EXPECT_TRUE(contains(ragged, "expected 3"));
  EXPECT_TRUE(contains(error_of("id,a\nx,0.1\nx,0.2\n"), "duplicate feature id 'x'"));
  const auto range = error_of("id,a,b\nx,0.1,0.2\ny,0.3,1.5\n");
  EXPECT_TRUE(contains(range, "feature 'y'"));
  EXPECT_TRUE(contains(range, "column 'b'"));
  EXPECT_TRUE(contains(error_of("id,a\nx,abc\n"), "line 2, column 'a'"));
  EXPECT_TRUE(contains(error_of("id,a\nx,0.1x\n"), "not a number"));
  EXPECT_TRUE(contains(error_of("id,a,b\nx,,0.1\n"), "missing value"));
  EXPECT_TRUE(contains(error_of("id,a\nx,nan\n"), "feature 'x'"));
}

TEST(Table, RealModeAcceptsAnyFiniteNumber) {
  const auto t = parse_table("id,z\nx,-3.5\ny,12\n", CellMode::kReal);
  EXPECT_DOUBLE_EQ(t.values(0, 0), -3.5);
  EXPECT_TRUE(contains(error_of("id,z\nx,inf\n", CellMode::kReal), "not finite"));
}

TEST(Report, NumberFormatting) {
  EXPECT_EQ(format_number(0.047), "0.047");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(5e-7), "5e-07");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Report, FormattedNumbersRoundTripAtTwelveDigits) {
  for (double v : {0.1, 1.0 / 7.0, 2.5e-300, 0.999999999999, 123456.789}) {
    const double back = std::strtod(format_number(v).c_str(), nullptr);
    EXPECT_EQ(format_number(back), format_number(v));
    EXPECT_NEAR(back, v, 1e-11 * std::fabs(v));
  }
}

TEST(Report, EscapingRoundTripsThroughParser) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("q\"x"), "\"q\"\"x\"");
  ReportTable rep({"feature", "value"});
  rep.add_row({"a,b", "0.5"});
  rep.add_row({"line\nbreak", "1"});
  rep.add_row({"q\"", "0"});
  const auto recs = parse_csv(rep.to_csv());
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[1].fields[0], "a,b");
  EXPECT_EQ(recs[2].fields[0], "line\nbreak");
  EXPECT_EQ(recs[3].fields[0], "q\"");
  EXPECT_THROW(rep.add_row({"x"}), InputError);
}

TEST(Json, ModelRoundTrip) {
  const auto j = json::parse(R"({"n": 2, "prior": [{"state": [0, 0], "mass": 0.9}, {"state": [1, 1], "mass": 0.1}],
                                 "mu_pos": 3.0, "mu_neg": [-3.0, -2.5], "var_pos": 1.0, "var_neg": 1.5})");
  const auto m = model_from_json(j);
  EXPECT_DOUBLE_EQ(m.prior_of({0, 0}), 0.9);
  EXPECT_DOUBLE_EQ(m.prior_of({1, -1}), 0.0);
  EXPECT_DOUBLE_EQ(m.mu_neg[1], -2.5);
  EXPECT_DOUBLE_EQ(m.var_neg[0], 1.5);
  const auto back = model_from_json(model_to_json(m));
  EXPECT_EQ(back.prior, m.prior);
  EXPECT_EQ(back.mu_pos, m.mu_pos);
  EXPECT_EQ(back.mu_neg, m.mu_neg);
  EXPECT_EQ(back.var_pos, m.var_pos);
  EXPECT_EQ(back.var_neg, m.var_neg);
}

TEST(Json, ModelErrors) {
  EXPECT_THROW(model_from_json(json::parse(R"({"prior": []})")), InputError);
  EXPECT_THROW(model_from_json(json::parse(R"({"n": 2, "prior": [{"state": [0], "mass": 1}]})")), InputError);
  EXPECT_THROW(model_from_json(json::parse(R"({"n": 2, "prior": [{"state": [0, 0], "mass": 0.5}]})")), InputError);
  EXPECT_THROW(model_from_json(json::parse(R"({"n": 1, "prior": [{"state": [0], "mass": 1}], "mu_pos": -1})")),
               InputError);
  EXPECT_THROW(model_from_json(json::parse(R"({"n": 2, "prior": [{"state": [0, 0], "mass": 1}], "mu_pos": [1]})")),
               InputError);
}

TEST(Json, ScenarioForms) {
  const auto rows = scenario_from_json(json::parse(
      R"({"name": "ex", "n": 4, "rows": [{"count": 2, "cells": ["zero", {"law": "uniform", "repeat": 3}]},
                                          {"cells": [{"normal": -2}, "uniform", "zero", "uniform"]}]})"));
  EXPECT_EQ(rows.name, "ex");
  EXPECT_EQ(rows.m, 3u);
  EXPECT_EQ(rows.cell(1, 0), sim::CellLaw::zero());
  EXPECT_EQ(rows.cell(1, 3), sim::CellLaw::uniform());
  EXPECT_EQ(rows.cell(2, 0), sim::CellLaw::normal(-2));

  const auto four = scenario_from_json(
      json::parse(R"({"n": 10, "four_config": {"m": 100, "pi": [0.2, 0.2, 0.1, 0.5], "effect": {"normal": 3}}})"));
  EXPECT_EQ(four.m, 100u);
  EXPECT_EQ(four.cell(0, 0), sim::CellLaw::normal(3));

  const auto tg = scenario_from_json(
      json::parse(R"({"m": 50, "two_group": {"n": 1, "prior": [{"state": [0], "mass": 1}]}})"));
  EXPECT_TRUE(tg.two_group.has_value());
  EXPECT_EQ(tg.m, 50u);
}

TEST(Json, ScenarioRoundTrip) {
  auto s = sim::ScenarioSpec::four_config(40, 5, {0.25, 0.25, 0.25, 0.25}, sim::CellLaw::normal(2.5));
  s.name = "rt";
  const auto back = scenario_from_json(scenario_to_json(s));
  EXPECT_EQ(back.name, s.name);
  EXPECT_EQ(back.m, s.m);
  EXPECT_EQ(back.n, s.n);
  EXPECT_EQ(back.cells, s.cells);

  auto tg = sim::ScenarioSpec::from_two_group(TwoGroupModel::with_means(2, 3.0, -3.0), 10);
  const auto tg_back = scenario_from_json(scenario_to_json(tg));
  ASSERT_TRUE(tg_back.two_group.has_value());
  EXPECT_EQ(tg_back.two_group->prior, tg.two_group->prior);
}

TEST(Json, ScenarioErrors) {
  EXPECT_THROW(scenario_from_json(json::parse(R"({"n": 2, "rows": [{"cells": ["zero"]}]})")), InputError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"n": 2, "rows": [{"cells": ["bogus", "zero"]}]})")), InputError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"n": 2, "m": 3, "rows": [{"cells": ["zero", "zero"]}]})")),
               InputError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"n": 2, "four_config": {"m": 10, "pi": [0.9, 0.9, 0, 0]}})")),
               InputError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"rows": []})")), InputError);
}
