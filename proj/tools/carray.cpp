// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>

#include "carray/cache.hpp"
#include "carray/config.hpp"
#include "carray/experiments.hpp"
#include "carray/io.hpp"
#include "carray/optimizer.hpp"

namespace fs = std::filesystem;
using namespace carray;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitTrend = 4;

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> cache;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::string study;
  std::string report_dir;
};

config::RunConfig resolve(const Options& o) {
  config::RunConfig c = o.config.empty() ? config::RunConfig{} : config::load(o.config);
  if (o.out) c.out = *o.out;
  if (o.cache) c.cache = *o.cache;
  if (o.threads) c.threads = *o.threads;
  if (o.seed) c.ga.seed = *o.seed;
  c.validate();
  return c;
}

std::unique_ptr<ResultCache> open_cache(const config::RunConfig& c) {
  if (c.cache.empty()) return nullptr;
  return std::make_unique<ResultCache>(c.cache);
}

ojson mesh_json(em::Simulator& sim) {
  const auto st = mesh::mesh_stats(sim.mesh());
  ojson m;
  m["max_edge_len_mm"] = sim.max_edge_mm();
  m["vertices"] = st.vertices;
  m["triangles"] = st.triangles;
  m["basis_functions"] = sim.basis().size();
  m["min_angle_deg"] = st.min_angle_deg;
  m["longest_edge_mm"] = st.max_edge_mm;
  m["total_area_mm2"] = st.total_area_mm2;
  return m;
}

ojson scene_json(em::Simulator& sim) {
  const auto& sc = sim.scene();
  ojson s;
  s["eps_eff"] = sim.eps_eff();
  s["trace_width_mm"] = sc.feed.trace_width;
  s["trace_impedance_ohm"] =
      geometry::microstrip_impedance(sc.feed.trace_width, sc.stack.eps_r, sc.stack.feed_z());
  s["mesh"] = mesh_json(sim);
  return s;
}

ojson metadata(const std::string& command, const config::RunConfig& c,
               const std::unique_ptr<ResultCache>& cache) {
  ojson m;
  m["tool"] = "carray";
  m["command"] = command;
  m["config"] = ojson::parse(config::to_json(c));
  m["threads"] = set_threads(0);
  if (cache) m["cache"] = {{"dir", cache->dir().string()}};
  return m;
}

void finish_metadata(ojson& m, const std::unique_ptr<ResultCache>& cache, std::size_t solver_calls) {
  m["solver_calls"] = solver_calls;
  if (cache) {
    m["cache"]["hits"] = cache->hits();
    m["cache"]["misses"] = cache->misses();
  }
}

std::string sweep_svg(const em::SParamTable& table, const std::string& label) {
  std::vector<io::Panel> panels;
  std::vector<double> f;
  for (const auto& r : table.rows) f.push_back(r.frequency_ghz);
  for (int j = 0; j < 4; ++j) {
    std::vector<double> y;
    for (const auto& r : table.rows) y.push_back(io::to_db(std::abs(r.s(0, j))));
    const std::string name = "S1" + std::to_string(j + 1);
    panels.push_back({"|" + name + "|", "frequency (GHz)", "dB", {{label, f, y}}});
  }
  return io::render_svg(panels, 2);
}

std::string design_comment(const geometry::PatchDesign& d) {
  return " W=" + io::fmt(d.W, 4) + " L=" + io::fmt(d.L, 4) + " ins=" + io::fmt(d.ins, 4) +
         " h1=" + io::fmt(d.h1, 4) + " h2=" + io::fmt(d.h2, 4) + " mm";
}

// One sweep of `design` into dir: sparams.s4p, sparams.csv, summary.svg.
// Returns the solver-call count and fills `info` with scene details.
std::size_t write_sweep(const config::RunConfig& c, const geometry::PatchDesign& design,
                        const fs::path& dir, const std::unique_ptr<ResultCache>& cache,
                        ojson& info) {
  auto scene = geometry::build_scene(design, c.layout, c.feed, c.stack);
  em::Simulator sim(std::move(scene), c.max_edge_mm, c.solver);
  const auto run = experiments::sweep_with_widening(sim, c.f_start, c.f_stop, c.points, 0.0,
                                                    cache.get());
  io::write_text_atomic(dir / "sparams.s4p",
                        io::format_touchstone(run.table, c.solver.z0, {design_comment(design)}));
  io::write_text_atomic(dir / "sparams.csv", io::format_sparam_csv(run.table));
  io::write_text_atomic(dir / "summary.svg", sweep_svg(run.table, design_comment(design)));
  info = scene_json(sim);
  info["resonance_GHz"] = run.resonance.frequency_ghz;
  info["resonance_bracketed"] = run.resonance.bracketed;
  info["S11_at_resonance"] = run.resonance.magnitude;
  return run.solver_calls;
}

int cmd_simulate(const Options& o) {
  const auto c = resolve(o);
  set_threads(c.threads);
  const auto cache = open_cache(c);
  const fs::path out = c.out;
  ojson meta = metadata("simulate", c, cache);
  ojson info;
  const std::size_t calls = write_sweep(c, c.design, out, cache, info);
  meta["result"] = info;
  finish_metadata(meta, cache, calls);
  io::write_text_atomic(out / "metadata.json", meta.dump(2) + "\n");
  std::printf("simulate: resonance %.4f GHz, %zu solver calls, wrote %s\n",
              info["resonance_GHz"].get<double>(), calls, out.string().c_str());
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto study = experiments::parse_study(o.study);
  const auto c = resolve(o);
  set_threads(c.threads);
  const auto cache = open_cache(c);
  const fs::path out = fs::path(c.out) / experiments::to_string(study);
  ojson meta = metadata(std::string("sweep ") + experiments::to_string(study), c, cache);
  const auto outcome = experiments::run_study(study, c.settings(), out, cache.get());
  {
    em::Simulator sim(geometry::build_scene(c.design, c.layout, c.feed, c.stack), c.max_edge_mm,
                      c.solver);
    meta["base_scene"] = scene_json(sim);
  }
  ojson checks = ojson::array();
  for (const auto& a : outcome.assertions) {
    checks.push_back({{"name", a.name},
                      {"kind", a.hard ? "hard" : "logged"},
                      {"passed", a.passed},
                      {"detail", a.detail}});
    std::printf("  %-36s %-6s %s  %s\n", a.name.c_str(), a.hard ? "hard" : "logged",
                a.passed ? "pass" : "FAIL", a.detail.c_str());
  }
  meta["assertions"] = checks;
  finish_metadata(meta, cache, outcome.solver_calls);
  io::write_text_atomic(out / "metadata.json", meta.dump(2) + "\n");
  std::printf("sweep %s: %zu solver calls, wrote %s\n", experiments::to_string(study),
              outcome.solver_calls, out.string().c_str());
  return outcome.passed() ? 0 : kExitTrend;
}

int cmd_optimize(const Options& o) {
  const auto c = resolve(o);
  set_threads(c.threads);
  const auto cache = open_cache(c);
  const fs::path out = c.out;
  const auto problem = c.problem();
  ojson meta = metadata("optimize", c, cache);

  const auto baseline = opt::antenna_cost(c.design, problem);
  if (baseline.failed) throw SolverError("baseline design cannot be evaluated: " + baseline.error);
  const opt::Objective objective = [&](const opt::Genome& g) {
    const auto e = opt::antenna_cost(opt::design_from_genes(g, c.design), problem);
    return opt::Fitness{e.cost, e.failed};
  };
  const auto res = opt::run_ga(c.ga, c.bounds, objective, {opt::genes_from_design(c.design)});
  for (const auto& t : res.trace)
    std::fprintf(stderr, "generation %3d  best %.6f  mean %.6f  pc %.3f  pm %.3f  diversity %.4f\n",
                 t.generation, t.best_cost, t.mean_cost, t.pc, t.pm, t.diversity);

  config::RunConfig best = c;
  best.design = opt::design_from_genes(res.best.genes, c.design);
  io::write_text_atomic(out / "best_design.json", config::to_json(best));
  io::write_text_atomic(out / "ga_trace.csv", opt::trace_csv(res.trace));
  ojson info;
  const std::size_t calls = write_sweep(c, best.design, out / "best", cache, info);

  ojson r;
  r["baseline_cost"] = baseline.cost;
  r["best_cost"] = res.best.cost;
  r["best_design"] = ojson::parse(config::to_json(best))["design"];
  r["evaluations"] = res.evaluations;
  r["generations"] = res.trace.size() - 1;
  r["best_sweep"] = info;
  meta["result"] = r;
  finish_metadata(meta, cache, calls);
  io::write_text_atomic(out / "metadata.json", meta.dump(2) + "\n");
  std::printf("optimize: baseline cost %.6f, best cost %.6f, wrote %s\n", baseline.cost,
              res.best.cost, out.string().c_str());
  return 0;
}

int cmd_report(const Options& o) {
  std::string dir = o.report_dir;
  if (dir.empty()) dir = o.out ? *o.out : resolve(o).out;
  const std::string md = experiments::regenerate_report(dir);
  std::fputs(md.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concave-patch 2x2 array simulator, parameter studies and optimiser"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config (comments allowed)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--cache", o.cache, "result cache directory");
    sub->add_option("--threads", o.threads, "worker threads");
    sub->add_option("--seed", o.seed, "optimiser seed");
  };
  auto* simulate = app.add_subcommand("simulate", "one frequency sweep of the configured design");
  common(simulate);
  auto* sweep = app.add_subcommand("sweep", "concavity study: width, length, both or optimal");
  common(sweep);
  sweep->add_option("study", o.study, "study name")->required();
  auto* optimize = app.add_subcommand("optimize", "genetic optimisation of the design");
  common(optimize);
  auto* report = app.add_subcommand("report", "rebuild plots and summary.md from CSV outputs");
  common(report);
  report->add_option("dir", o.report_dir, "results directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o);
    if (*optimize) return cmd_optimize(o);
    if (*report) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const GeometryError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitConfig;
}
