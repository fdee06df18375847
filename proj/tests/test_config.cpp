// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <string>

#include "carray/config.hpp"

using namespace carray;
using namespace carray::config;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse(text).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
  EXPECT_EQ(to_json(parse("{}")), to_json(RunConfig{}));
  const RunConfig c = parse("{}");
  EXPECT_EQ(c.design.W, 11.55);
  EXPECT_EQ(c.design.ins, 2.531);
  EXPECT_EQ(c.max_edge_mm, 1.2);
  EXPECT_EQ(c.points, 41);
}

TEST(Config, CommentsAndPartialOverrides) {
  const RunConfig c = parse(R"(
    // line comment
    { "design": { "h1": 0.5 /* inline */ }, "sweep": { "points": 11 }, "seed": 7 })");
  EXPECT_EQ(c.design.h1, 0.5);
  EXPECT_EQ(c.design.W, 11.55);
  EXPECT_EQ(c.points, 11);
  EXPECT_EQ(c.ga.seed, 7u);
}

TEST(Config, UnknownKeysNameTheirPath) {
  EXPECT_TRUE(contains(error_of(R"({"design": {"Wx": 1}})"), "'design.Wx'"));
  EXPECT_TRUE(contains(error_of(R"({"ga": {"bounds": {"Q": [0, 1]}}})"), "ga.bounds.Q"));
  EXPECT_TRUE(contains(error_of(R"({"colour": 1})"), "colour"));
}

TEST(Config, TypeErrors) {
  EXPECT_TRUE(contains(error_of(R"({"ga": {"population": 2.5}})"), "ga.population"));
  EXPECT_TRUE(contains(error_of(R"({"design": {"W": "wide"}})"), "design.W"));
  EXPECT_TRUE(contains(error_of(R"({"ga": {"adaptive": 1}})"), "ga.adaptive"));
  EXPECT_TRUE(contains(error_of(R"({"ga": {"bounds": {"W": [1]}}})"), "ga.bounds.W"));
  EXPECT_TRUE(contains(error_of(R"({"design": 3})"), "design"));
  EXPECT_TRUE(contains(error_of("{ not json"), "not valid JSON"));
}

TEST(Config, InvalidValuesRaiseConfigError) {
  EXPECT_TRUE(contains(error_of(R"({"design": {"h1": 4.725}})"), "h1"));
  EXPECT_FALSE(error_of(R"({"mesh": {"max_edge_len": 0}})").empty());
  EXPECT_FALSE(error_of(R"({"sweep": {"f_start": 9, "f_stop": 8}})").empty());
  EXPECT_FALSE(error_of(R"({"ga": {"population": 1}})").empty());
  EXPECT_FALSE(error_of(R"({"study": {"optimum": {"h2": 20}}})").empty());
  EXPECT_FALSE(error_of(R"({"threads": -1})").empty());
  EXPECT_TRUE(error_of(R"({"design": {"h1": 1.0}})").empty());
}

TEST(Config, RoundTrip) {
  RunConfig c;
  c.design.h1 = 0.75;
  c.design.W = 10.1;
  c.points = 9;
  c.values = {0.0, 0.3};
  c.ga.population = 12;
  c.ga.adaptive = false;
  c.bounds.hi[0] = 12.5;
  c.cache = "somewhere";
  c.threads = 3;
  const std::string text = to_json(c);
  EXPECT_EQ(to_json(parse(text)), text);
  EXPECT_EQ(text.back(), '\n');
}

TEST(Config, ShippedFilesParse) {
  const std::string dir = CARRAY_CONFIG_DIR;
  EXPECT_EQ(to_json(load(dir + "/baseline.jsonc")), to_json(RunConfig{}));
  const RunConfig q = load(dir + "/quick.jsonc");
  EXPECT_EQ(q.max_edge_mm, 2.4);
  EXPECT_NO_THROW(q.validate());
  EXPECT_THROW(load(dir + "/absent.jsonc"), ConfigError);
}
