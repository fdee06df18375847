// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_CONFIG_HPP
#define CARRAY_CONFIG_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "carray/em.hpp"
#include "carray/experiments.hpp"
#include "carray/geometry.hpp"
#include "carray/optimizer.hpp"

// Run configuration read from a JSON file that may contain // and /* */
// comments. Every key is optional; unknown keys are rejected.
namespace carray::config {

struct RunConfig {
  geometry::StackUp stack;
  geometry::PatchDesign design;
  geometry::ArrayLayout layout;
  geometry::FeedSpec feed;
  em::SolverConfig solver;
  double max_edge_mm = 1.2;

  // Frequency window in GHz.
  double f_start = 7.5;
  double f_stop = 9.5;
  int points = 41;
  double widen = 0.5;

  // Studies and cost.
  std::vector<double> values{0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
  double f0 = 8.55;
  geometry::PatchDesign optimum{9.213, 10.103, 1.527, 1.601, 2.531};
  opt::CostWeights weights;

  opt::GaConfig ga;
  opt::GeneBounds bounds = opt::GeneBounds::antenna();

  std::string out = "results";
  std::string cache;  // empty: no cache
  int threads = 0;    // 0: library default

  // Throws ConfigError naming the offending key. Scene-level checks raise
  // ConfigError too, so every invalid input maps onto one error type.
  void validate() const;

  experiments::Settings settings() const;
  opt::AntennaProblem problem() const;
};

RunConfig parse(std::string_view text);
RunConfig load(const std::string& path);

// Canonical JSON of every field, two-space indented, keys in schema order.
std::string to_json(const RunConfig& cfg);

}  // namespace carray::config

#endif  // CARRAY_CONFIG_HPP
