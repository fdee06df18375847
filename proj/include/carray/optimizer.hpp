// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_OPTIMIZER_HPP
#define CARRAY_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "carray/em.hpp"
#include "carray/geometry.hpp"

// Real-coded genetic algorithm whose crossover and mutation rates are set
// each generation by a small Mamdani controller.
namespace carray::opt {

using Rng = std::mt19937_64;
using Genome = std::vector<double>;

struct GeneBounds {
  std::vector<std::string> names;
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const { return lo.size(); }
  void validate() const;
  Genome clip(Genome g) const;
  bool contains(const Genome& g) const;

  // W, L, ins, h1, h2 in mm.
  static GeneBounds antenna();
  static GeneBounds box(std::size_t n, double lo, double hi);
};

struct GaConfig {
  int population = 24;
  int generations = 40;
  double pc = 0.8;  // rates used when adaptive is false
  double pm = 0.1;
  double pc_min = 0.5;
  double pc_max = 0.95;
  double pm_min = 0.01;
  double pm_max = 0.30;
  int tournament = 2;
  int elite = 2;
  double alpha = 0.5;
  double sigma_fraction = 0.1;
  int stagnation_window = 10;
  bool adaptive = true;
  double max_failure_fraction = 0.5;  // per generation, above this run_ga throws
  std::uint64_t seed = 1;

  void validate() const;
};

struct Member {
  Genome genes;
  double cost = 0.0;
  bool failed = false;
};

struct Fitness {
  double cost = 0.0;
  bool failed = false;
};

using Objective = std::function<Fitness(const Genome&)>;
Objective plain(std::function<double(const Genome&)> f);

// Index of the lowest-cost member among k uniform draws with replacement;
// k >= population size scans the whole population.
std::size_t tournament_select(const std::vector<Member>& population, int k, Rng& rng);

// BLX-alpha on every gene with probability pc for the pair, else copies.
std::pair<Genome, Genome> blend_crossover(const Genome& p1, const Genome& p2, double alpha,
                                          double pc, const GeneBounds& bounds, Rng& rng);

// Per gene with probability pm: add N(0, (sigma_fraction * (hi - lo))^2), clip.
Genome gaussian_mutate(Genome g, double pm, double sigma_fraction, const GeneBounds& bounds,
                       Rng& rng);

// Mean pairwise Euclidean distance of bound-normalised genomes over sqrt(d).
double diversity_metric(const std::vector<Genome>& population, const GeneBounds& bounds);

// Triangular Low/Medium/High sets on [0, 1] for both inputs and both outputs.
// Rule strength is the product of the input memberships; rules sharing a
// consequent add up. Outputs are clipped sets combined by max, defuzzified by
// exact centroid and mapped onto [min, max].
class FuzzyController {
 public:
  enum Level { low = 0, medium = 1, high = 2 };

  FuzzyController(double pc_min, double pc_max, double pm_min, double pm_max);
  explicit FuzzyController(const GaConfig& cfg)
      : FuzzyController(cfg.pc_min, cfg.pc_max, cfg.pm_min, cfg.pm_max) {}

  struct Rates {
    double pc;
    double pm;
  };
  Rates adapt(double diversity, double stagnation) const;

  static double membership(Level level, double x);
  // Rule tables indexed [diversity level][stagnation level].
  static const Level kPmRules[3][3];
  static const Level kPcRules[3][3];

  // Centroid in [0, 1] of the max of output sets clipped at `strength`.
  static double centroid(const double strength[3]);

 private:
  double pc_min_, pc_max_, pm_min_, pm_max_;
};

struct TraceRow {
  int generation = 0;
  double best_cost = 0.0;
  double mean_cost = 0.0;
  double pc = 0.0;
  double pm = 0.0;
  double diversity = 0.0;
  int failures = 0;
};

struct GaResult {
  Member best;
  std::vector<TraceRow> trace;
  std::size_t evaluations = 0;
};

// Generation 0 is the initial population: `seeds` first (clipped), then
// uniform draws. Each later generation breeds `population` children; a child
// replaces the worse of two random members if it is better and not a copy of
// an existing member. The `elite` best members are never replaced. Random
// draws happen on the sequential path; evaluations may run in parallel.
GaResult run_ga(const GaConfig& cfg, const GeneBounds& bounds, const Objective& objective,
                const std::vector<Genome>& seeds = {});

std::string trace_csv(const std::vector<TraceRow>& trace);

// Antenna objective.
struct CostWeights {
  double reflection = 1.0;
  double coupling = 1.0;
};
inline constexpr double kPenaltyCost = 10.0;

double cost_from_s(const em::Matrix4c& s, const CostWeights& w = {});

geometry::PatchDesign design_from_genes(const Genome& g, const geometry::PatchDesign& base = {});
Genome genes_from_design(const geometry::PatchDesign& d);

struct AntennaProblem {
  geometry::ArrayLayout layout;
  geometry::FeedSpec feed;
  geometry::StackUp stack;
  em::SolverConfig solver;
  double max_edge_mm = 1.2;
  double f0_ghz = 8.55;
  CostWeights weights;
};

struct AntennaEvaluation {
  double cost = kPenaltyCost;
  bool failed = true;
  std::string error;
  em::Matrix4c s = em::Matrix4c::Zero();
};

// Invalid or unsimulable designs get kPenaltyCost and failed = true.
AntennaEvaluation antenna_cost(const geometry::PatchDesign& design, const AntennaProblem& problem);

}  // namespace carray::opt

#endif  // CARRAY_OPTIMIZER_HPP
