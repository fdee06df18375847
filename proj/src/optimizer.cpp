// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "carray/io.hpp"

namespace carray::opt {

// ------------------------------------------------------------------ bounds

void GeneBounds::validate() const {
  if (lo.empty() || lo.size() != hi.size()) throw ConfigError("gene bounds: lo/hi size mismatch");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i]))
      throw ConfigError("gene bounds: lo < hi violated for gene " +
                        (i < names.size() ? names[i] : std::to_string(i)));
}

Genome GeneBounds::clip(Genome g) const {
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::clamp(g[i], lo[i], hi[i]);
  return g;
}

bool GeneBounds::contains(const Genome& g) const {
  if (g.size() != size()) return false;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(g[i] >= lo[i] && g[i] <= hi[i])) return false;
  return true;
}

GeneBounds GeneBounds::antenna() {
  return {{"W", "L", "ins", "h1", "h2"}, {7.0, 7.0, 0.0, 0.0, 0.0}, {14.0, 14.0, 5.0, 2.0, 2.0}};
}

GeneBounds GeneBounds::box(std::size_t n, double lo, double hi) {
  GeneBounds b;
  for (std::size_t i = 0; i < n; ++i) b.names.push_back("x" + std::to_string(i));
  b.lo.assign(n, lo);
  b.hi.assign(n, hi);
  return b;
}

void GaConfig::validate() const {
  auto open01 = [](double v) { return v > 0.0 && v < 1.0; };
  if (population < 4) throw ConfigError("ga.population must be >= 4");
  if (generations < 0) throw ConfigError("ga.generations must be >= 0");
  if (elite < 0 || elite >= population) throw ConfigError("ga.elite must be in [0, population)");
  if (tournament < 1) throw ConfigError("ga.tournament must be >= 1");
  if (!(open01(pc_min) && open01(pc_max) && pc_min <= pc_max))
    throw ConfigError("ga.pc_min/pc_max must satisfy 0 < pc_min <= pc_max < 1");
  if (!(open01(pm_min) && open01(pm_max) && pm_min <= pm_max))
    throw ConfigError("ga.pm_min/pm_max must satisfy 0 < pm_min <= pm_max < 1");
  if (!(pc >= pc_min && pc <= pc_max)) throw ConfigError("ga.pc must lie in [pc_min, pc_max]");
  if (!(pm >= pm_min && pm <= pm_max)) throw ConfigError("ga.pm must lie in [pm_min, pm_max]");
  if (!(alpha >= 0.0)) throw ConfigError("ga.alpha must be >= 0");
  if (!(sigma_fraction >= 0.0)) throw ConfigError("ga.sigma_fraction must be >= 0");
  if (stagnation_window < 1) throw ConfigError("ga.stagnation_window must be >= 1");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0))
    throw ConfigError("ga.max_failure_fraction must be in [0, 1]");
}

Objective plain(std::function<double(const Genome&)> f) {
  return [f = std::move(f)](const Genome& g) { return Fitness{f(g), false}; };
}

// --------------------------------------------------------------- operators

std::size_t tournament_select(const std::vector<Member>& population, int k, Rng& rng) {
  if (population.empty()) throw Error("tournament on an empty population");
  if (k >= int(population.size()))
    return std::size_t(std::min_element(population.begin(), population.end(),
                                        [](const Member& a, const Member& b) {
                                          return a.cost < b.cost;
                                        }) -
                       population.begin());
  std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
  std::size_t best = pick(rng);
  for (int i = 1; i < k; ++i) {
    const std::size_t c = pick(rng);
    if (population[c].cost < population[best].cost) best = c;
  }
  return best;
}

std::pair<Genome, Genome> blend_crossover(const Genome& p1, const Genome& p2, double alpha,
                                          double pc, const GeneBounds& bounds, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (!(u01(rng) < pc)) return {p1, p2};
  Genome c1(p1.size()), c2(p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    const double lo = std::min(p1[i], p2[i]), hi = std::max(p1[i], p2[i]);
    const double d = hi - lo;
    const double a = lo - alpha * d, span = d * (1.0 + 2.0 * alpha);
    c1[i] = a + span * u01(rng);
    c2[i] = a + span * u01(rng);
  }
  return {bounds.clip(std::move(c1)), bounds.clip(std::move(c2))};
}

Genome gaussian_mutate(Genome g, double pm, double sigma_fraction, const GeneBounds& bounds,
                       Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(u01(rng) < pm)) continue;
    g[i] += sigma_fraction * (bounds.hi[i] - bounds.lo[i]) * n01(rng);
  }
  return bounds.clip(std::move(g));
}

double diversity_metric(const std::vector<Genome>& population, const GeneBounds& bounds) {
  const std::size_t n = population.size();
  if (n < 2) throw Error("diversity needs at least 2 members");
  const std::size_t d = bounds.size();
  double sum = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double t = (population[a][i] - population[b][i]) / (bounds.hi[i] - bounds.lo[i]);
        s += t * t;
      }
      sum += std::sqrt(s);
    }
  const double pairs = 0.5 * double(n) * double(n - 1);
  return std::clamp(sum / pairs / std::sqrt(double(d)), 0.0, 1.0);
}

// ------------------------------------------------------------------- fuzzy

using L = FuzzyController::Level;

const FuzzyController::Level FuzzyController::kPmRules[3][3] = {
    {L::medium, L::high, L::high},  // diversity low
    {L::low, L::medium, L::high},  // diversity medium
    {L::low, L::low, L::medium},   // diversity high
};
const FuzzyController::Level FuzzyController::kPcRules[3][3] = {
    {L::low, L::low, L::low},
    {L::medium, L::medium, L::low},
    {L::high, L::high, L::medium},
};

namespace {

constexpr double kPeak[3] = {0.0, 0.5, 1.0};
constexpr double kHalf = 0.5;

double tri(int level, double x) {
  return std::max(0.0, 1.0 - std::abs(x - kPeak[level]) / kHalf);
}

}  // namespace

FuzzyController::FuzzyController(double pc_min, double pc_max, double pm_min, double pm_max)
    : pc_min_(pc_min), pc_max_(pc_max), pm_min_(pm_min), pm_max_(pm_max) {}

double FuzzyController::membership(Level level, double x) { return tri(level, x); }

double FuzzyController::centroid(const double strength[3]) {
  // Each clipped set min(w, tri) is linear between its own breakpoints; add
  // the crossings between sets so that the aggregate max is linear on every
  // sub-interval, then integrate exactly.
  std::vector<double> xs;
  for (int c = 0; c < 3; ++c) {
    const double w = strength[c];
    if (!(w > 0.0)) continue;
    const double p = kPeak[c];
    xs.insert(xs.end(), {p - kHalf, p + kHalf, p, p - kHalf + w * kHalf, p + kHalf - w * kHalf});
  }
  if (xs.empty()) return 0.5;
  auto f = [&](int c, double x) { return std::min(strength[c], tri(c, x)); };
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> all = xs;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = xs[i], b = xs[i + 1];
    for (int c = 0; c < 3; ++c)
      for (int e = c + 1; e < 3; ++e) {
        const double da = f(c, a) - f(e, a), db = f(c, b) - f(e, b);
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) all.push_back(a + (b - a) * da / (da - db));
      }
  }
  std::sort(all.begin(), all.end());
  auto mu = [&](double x) { return std::max({f(0, x), f(1, x), f(2, x)}); };
  double area = 0.0, moment = 0.0;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const double a = all[i], b = all[i + 1], h = b - a;
    if (!(h > 0.0)) continue;
    const double ya = mu(a), yb = mu(b);
    area += 0.5 * h * (ya + yb);
    moment += h * (ya * (2.0 * a + b) + yb * (a + 2.0 * b)) / 6.0;
  }
  if (!(area > 0.0)) return 0.5;
  return moment / area;
}

FuzzyController::Rates FuzzyController::adapt(double diversity, double stagnation) const {
  const double d = std::clamp(diversity, 0.0, 1.0);
  const double s = std::clamp(stagnation, 0.0, 1.0);
  double pm_w[3] = {0, 0, 0}, pc_w[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double w = tri(i, d) * tri(j, s);
      pm_w[kPmRules[i][j]] += w;
      pc_w[kPcRules[i][j]] += w;
    }
  for (int c = 0; c < 3; ++c) {
    pm_w[c] = std::min(pm_w[c], 1.0);
    pc_w[c] = std::min(pc_w[c], 1.0);
  }
  const double upc = std::clamp(centroid(pc_w), 0.0, 1.0);
  const double upm = std::clamp(centroid(pm_w), 0.0, 1.0);
  return {std::clamp(pc_min_ + upc * (pc_max_ - pc_min_), pc_min_, pc_max_),
          std::clamp(pm_min_ + upm * (pm_max_ - pm_min_), pm_min_, pm_max_)};
}

// ---------------------------------------------------------------------- GA

namespace {

void evaluate(std::vector<Member>& pop, std::size_t from, const Objective& objective) {
  const long n = long(pop.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = long(from); i < n; ++i) {
    Fitness f{std::numeric_limits<double>::infinity(), true};
    try {
      f = objective(pop[i].genes);
    } catch (const std::exception&) {
      // Exceptions must not leave the parallel region; count as a failure.
    }
    pop[i].cost = std::isnan(f.cost) ? std::numeric_limits<double>::infinity() : f.cost;
    pop[i].failed = f.failed;
  }
}

bool better(const Member& a, const Member& b) { return a.cost < b.cost; }

}  // namespace

GaResult run_ga(const GaConfig& cfg, const GeneBounds& bounds, const Objective& objective,
                const std::vector<Genome>& seeds) {
  cfg.validate();
  bounds.validate();
  Rng rng(cfg.seed);
  const FuzzyController fuzzy(cfg);
  GaResult res;

  std::vector<Member> pop;
  for (const Genome& g : seeds) {
    if (int(pop.size()) == cfg.population) break;
    if (g.size() != bounds.size()) throw ConfigError("seed genome has the wrong length");
    pop.push_back({bounds.clip(g), 0.0, false});
  }
  while (int(pop.size()) < cfg.population) {
    Genome g(bounds.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = std::uniform_real_distribution<double>(bounds.lo[i], bounds.hi[i])(rng);
    pop.push_back({std::move(g), 0.0, false});
  }

  auto record = [&](int gen, double pc, double pm, double div) {
    TraceRow t;
    t.generation = gen;
    const auto best = std::min_element(pop.begin(), pop.end(), better);
    if (gen == 0 || best->cost < res.best.cost) res.best = *best;
    t.best_cost = res.best.cost;
    double sum = 0.0;
    for (const auto& m : pop) {
      sum += m.cost;
      t.failures += m.failed ? 1 : 0;
    }
    t.mean_cost = sum / double(pop.size());
    t.pc = pc;
    t.pm = pm;
    t.diversity = div;
    res.trace.push_back(t);
  };
  auto check_failures = [&](int gen, int failed, int evaluated) {
    if (evaluated > 0 && double(failed) > cfg.max_failure_fraction * double(evaluated))
      throw SolverError("generation " + std::to_string(gen) + ": " + std::to_string(failed) +
                        " of " + std::to_string(evaluated) + " evaluations failed");
  };

  evaluate(pop, 0, objective);
  res.evaluations += pop.size();
  {
    int failed = 0;
    for (const auto& m : pop) failed += m.failed ? 1 : 0;
    check_failures(0, failed, int(pop.size()));
  }
  std::vector<Genome> genomes;
  auto current_diversity = [&] {
    genomes.clear();
    for (const auto& m : pop) genomes.push_back(m.genes);
    return diversity_metric(genomes, bounds);
  };
  record(0, cfg.pc, cfg.pm, current_diversity());

  int stagnant = 0;
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    const double div = current_diversity();
    const double stag = std::min(1.0, double(stagnant) / double(cfg.stagnation_window));
    double pc = cfg.pc, pm = cfg.pm;
    if (cfg.adaptive) {
      const auto r = fuzzy.adapt(div, stag);
      pc = r.pc;
      pm = r.pm;
    }

    // Breed one full brood from the current population.
    std::vector<Member> brood;
    brood.reserve(cfg.population);
    while (int(brood.size()) < cfg.population) {
      const Genome& a = pop[tournament_select(pop, cfg.tournament, rng)].genes;
      const Genome& b = pop[tournament_select(pop, cfg.tournament, rng)].genes;
      auto [c1, c2] = blend_crossover(a, b, cfg.alpha, pc, bounds, rng);
      brood.push_back({gaussian_mutate(std::move(c1), pm, cfg.sigma_fraction, bounds, rng), 0.0, false});
      if (int(brood.size()) < cfg.population)
        brood.push_back({gaussian_mutate(std::move(c2), pm, cfg.sigma_fraction, bounds, rng), 0.0, false});
    }
    evaluate(brood, 0, objective);
    res.evaluations += brood.size();
    int failed = 0;
    for (const auto& m : brood) failed += m.failed ? 1 : 0;
    check_failures(gen, failed, int(brood.size()));

    // Each child replaces the worse of two random members when it is better
    // and not already present. The `elite` best members are never replaced.
    std::vector<std::size_t> order(pop.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return better(pop[x], pop[y]); });
    std::vector<char> protect(pop.size(), 0);
    for (int e = 0; e < cfg.elite; ++e) protect[order[e]] = 1;
    const double before = res.best.cost;
    std::vector<Member> next = pop;
    std::uniform_int_distribution<std::size_t> pick(0, next.size() - 1);
    for (auto& child : brood) {
      const std::size_t i = pick(rng), j = pick(rng);
      const std::size_t w = better(next[i], next[j]) ? j : i;
      if (protect[w] || !better(child, next[w])) continue;
      bool present = false;
      for (const auto& m : next) present = present || m.genes == child.genes;
      if (!present) next[w] = std::move(child);
    }
    pop = std::move(next);
    record(gen, pc, pm, div);
    stagnant = res.best.cost < before ? 0 : stagnant + 1;
  }
  return res;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  io::CsvTable t;
  t.header = {"generation", "best_cost", "mean_cost", "pc", "pm", "diversity"};
  for (const auto& r : trace)
    t.rows.push_back({std::to_string(r.generation), io::fmt_sci(r.best_cost),
                      io::fmt_sci(r.mean_cost), io::fmt(r.pc, 9), io::fmt(r.pm, 9),
                      io::fmt(r.diversity, 9)});
  return io::format_csv(t);
}

// ----------------------------------------------------------------- antenna

double cost_from_s(const em::Matrix4c& s, const CostWeights& w) {
  double refl = 0.0, coup = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double m = std::abs(s(i, j));
      if (i == j) refl = std::max(refl, m);
      else coup = std::max(coup, m);
    }
  return w.reflection * refl + w.coupling * coup;
}

geometry::PatchDesign design_from_genes(const Genome& g, const geometry::PatchDesign& base) {
  if (g.size() != 5) throw ConfigError("antenna genome needs 5 genes (W, L, ins, h1, h2)");
  geometry::PatchDesign d = base;
  d.W = g[0];
  d.L = g[1];
  d.ins = g[2];
  d.h1 = g[3];
  d.h2 = g[4];
  return d;
}

Genome genes_from_design(const geometry::PatchDesign& d) { return {d.W, d.L, d.ins, d.h1, d.h2}; }

AntennaEvaluation antenna_cost(const geometry::PatchDesign& design, const AntennaProblem& problem) {
  AntennaEvaluation out;
  try {
    auto scene = geometry::build_scene(design, problem.layout, problem.feed, problem.stack);
    const auto violations = geometry::validate_scene(scene);
    if (!violations.empty()) throw GeometryError(violations.front().message);
    em::Simulator sim(std::move(scene), problem.max_edge_mm, problem.solver);
    out.s = sim.solve(problem.f0_ghz).s;
    const double c = cost_from_s(out.s, problem.weights);
    if (!std::isfinite(c)) throw SolverError("non-finite cost");
    out.cost = c;
    out.failed = false;
  } catch (const Error& e) {
    out.cost = kPenaltyCost;
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace carray::opt
