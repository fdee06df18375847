// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_EXPERIMENTS_HPP
#define CARRAY_EXPERIMENTS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "carray/cache.hpp"
#include "carray/em.hpp"
#include "carray/geometry.hpp"
#include "carray/io.hpp"
#include "carray/optimizer.hpp"

// Concavity parameter studies and the optimum-versus-baseline comparison.
namespace carray::experiments {

namespace fs = std::filesystem;

enum class Study { width, length, both, optimal };
Study parse_study(const std::string& name);  // throws ConfigError
const char* to_string(Study s);

struct Settings {
  geometry::PatchDesign base;
  geometry::ArrayLayout layout;
  geometry::FeedSpec feed;
  geometry::StackUp stack;
  em::SolverConfig solver;
  double max_edge_mm = 1.2;
  std::vector<double> values{0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
  double f_start = 7.5;
  double f_stop = 9.5;
  int points = 41;
  double widen = 0.5;  // applied once when a resonance is unbracketed
  double f0 = 8.55;
  geometry::PatchDesign optimum{9.213, 10.103, 1.527, 1.601, 2.531};
  opt::CostWeights weights;

  void validate() const;
};

// One sweep with automatic widening; the widened grid keeps the step.
struct SweepRun {
  em::SParamTable table;
  em::Resonance resonance;
  double f_start = 0.0;
  double f_stop = 0.0;
  int points = 0;
  bool widened = false;
  std::size_t solver_calls = 0;
};

SweepRun sweep_with_widening(em::Simulator& sim, double f_start, double f_stop, int points,
                             double widen, const ResultCache* cache);

// S at one frequency through the cache.
em::Matrix4c solve_point(em::Simulator& sim, double f_ghz, const ResultCache* cache,
                         std::size_t& solver_calls);

struct Assertion {
  std::string name;
  bool hard = true;  // soft ones are logged only
  bool passed = false;
  std::string detail;
};

struct Outcome {
  std::vector<Assertion> assertions;
  std::size_t solver_calls = 0;
  fs::path dir;

  bool passed() const;  // all hard assertions
};

// Writes <out>/report.csv, assertions.csv, points/*.s4p|csv and summary.svg.
// Assertions are computed by re-reading report.csv.
Outcome run_study(Study study, const Settings& settings, const fs::path& out,
                  const ResultCache* cache);

std::vector<Assertion> evaluate_assertions(Study study, const io::CsvTable& report,
                                           double f0_ghz);

// Average-rank Spearman correlation.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Maximum |S_ij| over i != j.
double max_coupling(const em::Matrix4c& s);

// summary.svg for one study directory, from report.csv and point CSVs only.
std::string render_study_svg(const fs::path& dir);

// Regenerates every study's summary.svg below `results` and writes
// results/summary.md. Throws FormatError on missing or corrupt CSVs.
std::string regenerate_report(const fs::path& results);

}  // namespace carray::experiments

#endif  // CARRAY_EXPERIMENTS_HPP
