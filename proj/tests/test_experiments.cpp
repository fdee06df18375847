// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "carray/experiments.hpp"

using namespace carray;
using namespace carray::experiments;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("carray_test_experiments_" + name);
  fs::remove_all(d);
  return d;
}

Settings small() {
  Settings st;
  st.max_edge_mm = 2.4;
  st.values = {0.0, 0.5, 1.0};
  st.f_start = 7.6;
  st.f_stop = 8.8;
  st.points = 7;
  return st;
}

io::CsvTable report_with(const std::vector<std::vector<double>>& cols,
                         const std::vector<std::string>& names) {
  io::CsvTable t;
  t.header = {"label",    "h1_mm",    "h2_mm",    "W_mm",     "L_mm",
              "ins_mm",   "resonance_GHz", "bracketed", "S11_res", "f_orig_GHz",
              "S12_orig", "S13_orig", "S14_orig", "max_coupling_orig", "S11_f0",
              "S12_f0",   "S13_f0",   "S14_f0",   "max_coupling_f0",   "cost_f0",
              "s4p",      "csv"};
  const std::size_t n = cols.front().size();
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::string> row(t.header.size(), "0");
    row[0] = "r" + std::to_string(r);
    row[7] = "1";
    row[20] = "x.s4p";
    row[21] = "x.csv";
    for (std::size_t c = 0; c < names.size(); ++c)
      row[t.column_index(names[c])] = io::fmt(cols[c][r], 6);
    t.rows.push_back(row);
  }
  return t;
}

const Assertion& find(const std::vector<Assertion>& as, const std::string& name) {
  for (const auto& a : as)
    if (a.name == name) return a;
  throw std::runtime_error("no assertion " + name);
}

}  // namespace

TEST(Study, Names) {
  EXPECT_EQ(parse_study("width"), Study::width);
  EXPECT_EQ(parse_study("length"), Study::length);
  EXPECT_EQ(parse_study("both"), Study::both);
  EXPECT_EQ(parse_study("optimal"), Study::optimal);
  EXPECT_STREQ(to_string(Study::both), "both");
  EXPECT_THROW(parse_study("depth"), ConfigError);
}

TEST(Settings, Validation) {
  Settings st;
  EXPECT_NO_THROW(st.validate());
  st.points = 1;
  EXPECT_THROW(st.validate(), ConfigError);
  st = {};
  st.f_stop = st.f_start;
  EXPECT_THROW(st.validate(), ConfigError);
  st = {};
  st.values = {0.5, 0.25};
  EXPECT_THROW(st.validate(), ConfigError);
  st = {};
  st.max_edge_mm = 0.0;
  EXPECT_THROW(st.validate(), ConfigError);
}

TEST(Spearman, Oracles) {
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-15);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {1, 4, 9, 100}), 1.0, 1e-15);
  // Ranks (1.5, 1.5, 3.5, 3.5) against (1, 2, 3, 4): 4 / sqrt(20).
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {5, 5, 7, 7}), 4.0 / std::sqrt(20.0), 1e-15);
  EXPECT_THROW(spearman({1, 2}, {1, 2, 3}), Error);
}

TEST(MaxCoupling, OffDiagonalOnly) {
  em::Matrix4c s = em::Matrix4c::Zero();
  s(0, 0) = 0.9;
  s(2, 1) = {0.3, 0.4};
  s(3, 0) = 0.2;
  EXPECT_NEAR(max_coupling(s), 0.5, 1e-15);
}

TEST(Assertions, WidthFromCsv) {
  const std::vector<double> h{0, 0.5, 1.0};
  const auto up = report_with({h, {8.0, 8.1, 8.3}, {0.3, 0.25, 0.2}, {0.1, 0.2, 0.3}},
                              {"h1_mm", "resonance_GHz", "max_coupling_orig", "S11_res"});
  const auto a = evaluate_assertions(Study::width, up, 8.55);
  EXPECT_TRUE(find(a, "resonance_shifts_up").passed);
  EXPECT_TRUE(find(a, "resonance_rank_correlation").passed);
  EXPECT_TRUE(find(a, "coupling_decreases_at_original_f0").passed);
  EXPECT_TRUE(find(a, "reflection_increases").passed);
  EXPECT_FALSE(find(a, "reflection_increases").hard);

  const auto down = report_with({h, {8.3, 8.1, 8.0}, {0.3, 0.35, 0.4}},
                                {"h1_mm", "resonance_GHz", "max_coupling_orig"});
  const auto b = evaluate_assertions(Study::width, down, 8.55);
  EXPECT_FALSE(find(b, "resonance_shifts_up").passed);
  EXPECT_FALSE(find(b, "resonance_rank_correlation").passed);
  EXPECT_FALSE(find(b, "coupling_decreases_at_original_f0").passed);
}

TEST(Assertions, LengthAndBothAndOptimal) {
  const std::vector<double> h{0, 0.5, 1.0, 1.25};
  const auto len = report_with({h, {8.3, 8.2, 8.1, 8.0}, {0.2, 0.1, 0.05, 0.07}},
                               {"h2_mm", "resonance_GHz", "S11_res"});
  const auto a = evaluate_assertions(Study::length, len, 8.55);
  EXPECT_TRUE(find(a, "resonance_shifts_down").passed);
  EXPECT_TRUE(find(a, "s11_minimum_at_1mm").passed);

  const auto both = report_with({h, {0, 0.5, 1.0, 1.0}, {0.3, 0.2, 0.1, 0.1}},
                                {"h1_mm", "h2_mm", "max_coupling_orig"});
  const auto b = evaluate_assertions(Study::both, both, 8.55);
  EXPECT_FALSE(find(b, "h1_equals_h2").passed);
  EXPECT_TRUE(find(b, "coupling_decreases_at_original_f0").passed);

  const auto opt = report_with({{0.7, 0.6}}, {"cost_f0"});
  EXPECT_TRUE(find(evaluate_assertions(Study::optimal, opt, 8.55),
                   "optimum_cost_not_above_baseline").passed);
  const auto worse = report_with({{0.6, 0.7}}, {"cost_f0"});
  EXPECT_FALSE(find(evaluate_assertions(Study::optimal, worse, 8.55),
                    "optimum_cost_not_above_baseline").passed);

  io::CsvTable missing = opt;
  missing.header[19] = "cost";
  EXPECT_THROW(evaluate_assertions(Study::optimal, missing, 8.55), FormatError);
}

TEST(RunStudy, WidthOutputsAndCache) {
  const auto out = scratch_dir("width");
  const ResultCache cache(out / "cache");
  const Settings st = small();
  const Outcome o = run_study(Study::width, st, out / "width", &cache);

  const auto report = io::parse_csv(io::read_text(out / "width" / "report.csv"));
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.numbers("h1_mm"), (std::vector<double>{0.0, 0.5, 1.0}));
  for (const auto& row : report.rows) {
    EXPECT_TRUE(fs::exists(out / "width" / row[report.column_index("s4p")]));
    EXPECT_TRUE(fs::exists(out / "width" / row[report.column_index("csv")]));
  }
  EXPECT_TRUE(fs::exists(out / "width" / "summary.svg"));
  EXPECT_TRUE(fs::exists(out / "width" / "assertions.csv"));
  EXPECT_EQ(o.assertions.size(), evaluate_assertions(Study::width, report, st.f0).size());

  // The h = 0 row is the plain rectangle.
  auto scene = geometry::build_scene(st.base, st.layout, st.feed, st.stack);
  const auto plain = em::frequency_sweep(scene, st.max_edge_mm, st.solver, st.f_start, st.f_stop,
                                         st.points);
  const auto ts = io::parse_touchstone(io::read_text(out / "width" / "points" / "h1_0.00.s4p"));
  ASSERT_EQ(ts.table.rows.size(), plain.rows.size());
  for (std::size_t r = 0; r < plain.rows.size(); ++r)
    EXPECT_LT((ts.table.rows[r].s - plain.rows[r].s).cwiseAbs().maxCoeff(), 1e-11);

  // Every solve lands in the cache exactly once.
  std::size_t records = 0;
  for (const auto& e : fs::recursive_directory_iterator(out / "cache"))
    records += e.path().extension() == ".rec" ? 1 : 0;
  EXPECT_EQ(o.solver_calls, records);
  EXPECT_GE(o.solver_calls, std::size_t(3 * st.points));

  const auto before = io::read_text(out / "width" / "report.csv");
  const auto svg = io::read_text(out / "width" / "summary.svg");
  const Outcome again = run_study(Study::width, st, out / "width", &cache);
  EXPECT_EQ(again.solver_calls, 0u);
  EXPECT_EQ(io::read_text(out / "width" / "report.csv"), before);

  const std::string md1 = regenerate_report(out);
  EXPECT_EQ(io::read_text(out / "width" / "summary.svg"), svg);
  const std::string md2 = regenerate_report(out);
  EXPECT_EQ(md1, md2);
  EXPECT_EQ(io::read_text(out / "summary.md"), md1);
  EXPECT_NE(md1.find("## width"), std::string::npos);
}

TEST(RegenerateReport, Errors) {
  const auto out = scratch_dir("errors");
  fs::create_directories(out / "empty");
  EXPECT_THROW(regenerate_report(out / "empty"), FormatError);
  EXPECT_THROW(regenerate_report(out / "absent"), FormatError);
  fs::create_directories(out / "bad" / "width");
  io::write_text_atomic(out / "bad" / "width" / "report.csv", "label,csv\nx,missing.csv\n");
  EXPECT_THROW(regenerate_report(out / "bad"), FormatError);
}
