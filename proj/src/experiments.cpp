// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace carray::experiments {

namespace {

const std::vector<std::string> kReportHeader = {
    "label",        "h1_mm",      "h2_mm",      "W_mm",          "L_mm",
    "ins_mm",       "resonance_GHz", "bracketed", "S11_res",     "f_orig_GHz",
    "S12_orig",     "S13_orig",   "S14_orig",   "max_coupling_orig", "S11_f0",
    "S12_f0",       "S13_f0",     "S14_f0",     "max_coupling_f0",   "cost_f0",
    "s4p",          "csv"};

std::string value_tag(double v) { return io::fmt(v, 2); }

struct Row {
  std::string label;
  std::string tag;
  geometry::PatchDesign design;
};

std::vector<Row> rows_for(Study study, const Settings& st) {
  std::vector<Row> rows;
  if (study == Study::optimal) {
    rows.push_back({"baseline", "baseline", st.base});
    rows.push_back({"optimum", "optimum", st.optimum});
    return rows;
  }
  for (double v : st.values) {
    geometry::PatchDesign d = st.base;
    std::string name;
    if (study == Study::width) d.h1 = v, name = "h1";
    if (study == Study::length) d.h2 = v, name = "h2";
    if (study == Study::both) d.h1 = v, d.h2 = v, name = "h";
    rows.push_back({name + "=" + value_tag(v), name + "_" + value_tag(v), d});
  }
  return rows;
}

std::string mag(double v) { return io::fmt(v, 9); }

}  // namespace

Study parse_study(const std::string& name) {
  if (name == "width") return Study::width;
  if (name == "length") return Study::length;
  if (name == "both") return Study::both;
  if (name == "optimal") return Study::optimal;
  throw ConfigError("unknown study '" + name + "' (expected width, length, both or optimal)");
}

const char* to_string(Study s) {
  switch (s) {
    case Study::width: return "width";
    case Study::length: return "length";
    case Study::both: return "both";
    case Study::optimal: return "optimal";
  }
  return "?";
}

void Settings::validate() const {
  if (values.empty()) throw ConfigError("study.values must not be empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) throw ConfigError("study.values must be non-negative");
    if (i && !(values[i] > values[i - 1])) throw ConfigError("study.values must be strictly increasing");
  }
  if (!(f_start > 0.0 && f_start < f_stop)) throw ConfigError("sweep needs 0 < f_start < f_stop");
  if (points < 3) throw ConfigError("sweep.points must be >= 3");
  if (!(widen >= 0.0)) throw ConfigError("sweep.widen must be >= 0");
  if (!(f0 > 0.0)) throw ConfigError("f0 must be > 0");
  if (!(max_edge_mm > 0.0)) throw ConfigError("mesh.max_edge_len must be > 0 mm");
  base.validate();
  solver.validate();
}

em::Matrix4c solve_point(em::Simulator& sim, double f_ghz, const ResultCache* cache,
                         std::size_t& solver_calls) {
  std::string key;
  if (cache) {
    key = ResultCache::key(sim.scene(), sim.max_edge_mm(), sim.config(), f_ghz);
    if (auto hit = cache->load(key)) return *hit;
  }
  const std::size_t before = sim.assemble_calls();
  const em::Matrix4c s = sim.solve(f_ghz).s;
  solver_calls += sim.assemble_calls() - before;
  if (cache) cache->store(key, s);
  return s;
}

SweepRun sweep_with_widening(em::Simulator& sim, double f_start, double f_stop, int points,
                             double widen, const ResultCache* cache) {
  SweepRun run;
  auto once = [&](double a, double b, int n) {
    em::SweepCache hooks;
    if (cache) hooks = cache->hooks(sim.scene(), sim.max_edge_mm(), sim.config());
    const std::size_t before = sim.assemble_calls();
    run.table = em::frequency_sweep(sim, a, b, n, cache ? &hooks : nullptr);
    run.solver_calls += sim.assemble_calls() - before;
    run.resonance = em::find_resonance(run.table, 1);
    run.f_start = a;
    run.f_stop = b;
    run.points = n;
  };
  once(f_start, f_stop, points);
  if (!run.resonance.bracketed && widen > 0.0) {
    const double step = (f_stop - f_start) / (points - 1);
    const int extra = int(std::lround(widen / step));
    once(f_start - extra * step, f_stop + extra * step, points + 2 * extra);
    run.widened = true;
  }
  return run;
}

double max_coupling(const em::Matrix4c& s) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) m = std::max(m, std::abs(s(i, j)));
  return m;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw Error("spearman needs two equal series of length >= 2");
  auto ranks = [](const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
      const double avg = 0.5 * double(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = double(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

bool Outcome::passed() const {
  return std::all_of(assertions.begin(), assertions.end(),
                     [](const Assertion& a) { return !a.hard || a.passed; });
}

Outcome run_study(Study study, const Settings& st, const fs::path& out, const ResultCache* cache) {
  st.validate();
  Outcome res;
  res.dir = out;
  fs::create_directories(out / "points");

  auto make_sim = [&](const geometry::PatchDesign& d) {
    auto scene = geometry::build_scene(d, st.layout, st.feed, st.stack);
    const auto v = geometry::validate_scene(scene);
    if (!v.empty()) throw GeometryError(v.front().message);
    return em::Simulator(std::move(scene), st.max_edge_mm, st.solver);
  };

  // Resonance of the un-notched base design: the reference frequency at
  // which couplings are compared across the study.
  geometry::PatchDesign flat = st.base;
  if (study != Study::optimal) {
    if (study != Study::length) flat.h1 = 0.0;
    if (study != Study::width) flat.h2 = 0.0;
  }
  SweepRun flat_run;
  {
    em::Simulator sim = make_sim(flat);
    flat_run = sweep_with_widening(sim, st.f_start, st.f_stop, st.points, st.widen, cache);
    res.solver_calls += flat_run.solver_calls;
  }
  const double f_orig = flat_run.resonance.frequency_ghz;

  io::CsvTable report;
  report.header = kReportHeader;
  for (const Row& row : rows_for(study, st)) {
    em::Simulator sim = [&] {
      try {
        return make_sim(row.design);
      } catch (const Error& e) {
        throw GeometryError(std::string(to_string(study)) + " study, " + row.label + ": " + e.what());
      }
    }();
    SweepRun run;
    em::Matrix4c s_orig, s_f0;
    try {
      if (row.design == flat)
        run = flat_run, run.solver_calls = 0;
      else
        run = sweep_with_widening(sim, st.f_start, st.f_stop, st.points, st.widen, cache);
      s_orig = solve_point(sim, f_orig, cache, res.solver_calls);
      s_f0 = solve_point(sim, st.f0, cache, res.solver_calls);
    } catch (const SolverError& e) {
      throw SolverError(std::string(to_string(study)) + " study, " + row.label + ": " + e.what());
    }
    res.solver_calls += run.solver_calls;

    const std::string s4p = "points/" + row.tag + ".s4p";
    const std::string csv = "points/" + row.tag + ".csv";
    std::vector<std::string> comments = {
        " " + row.label + "  W=" + io::fmt(row.design.W, 4) + " L=" + io::fmt(row.design.L, 4) +
        " ins=" + io::fmt(row.design.ins, 4) + " h1=" + io::fmt(row.design.h1, 4) +
        " h2=" + io::fmt(row.design.h2, 4) + " mm"};
    io::write_text_atomic(out / s4p, io::format_touchstone(run.table, st.solver.z0, comments));
    io::write_text_atomic(out / csv, io::format_sparam_csv(run.table));

    const auto& d = row.design;
    report.rows.push_back({row.label,
                           io::fmt(d.h1, 6),
                           io::fmt(d.h2, 6),
                           io::fmt(d.W, 6),
                           io::fmt(d.L, 6),
                           io::fmt(d.ins, 6),
                           io::fmt(run.resonance.frequency_ghz, 6),
                           run.resonance.bracketed ? "1" : "0",
                           mag(run.resonance.magnitude),
                           io::fmt(f_orig, 6),
                           mag(std::abs(s_orig(0, 1))),
                           mag(std::abs(s_orig(0, 2))),
                           mag(std::abs(s_orig(0, 3))),
                           mag(max_coupling(s_orig)),
                           mag(std::abs(s_f0(0, 0))),
                           mag(std::abs(s_f0(0, 1))),
                           mag(std::abs(s_f0(0, 2))),
                           mag(std::abs(s_f0(0, 3))),
                           mag(max_coupling(s_f0)),
                           mag(opt::cost_from_s(s_f0, st.weights)),
                           s4p,
                           csv});
  }
  io::write_text_atomic(out / "report.csv", io::format_csv(report));

  // Assertions come from the file, not from the rows above.
  const io::CsvTable reread = io::parse_csv(io::read_text(out / "report.csv"));
  res.assertions = evaluate_assertions(study, reread, st.f0);
  io::CsvTable at;
  at.header = {"study", "assertion", "kind", "result", "detail"};
  for (const auto& a : res.assertions) {
    std::string detail = a.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    at.rows.push_back({to_string(study), a.name, a.hard ? "hard" : "logged",
                       a.passed ? "pass" : "fail", detail});
  }
  io::write_text_atomic(out / "assertions.csv", io::format_csv(at));
  io::write_text_atomic(out / "summary.svg", render_study_svg(out));
  return res;
}

std::vector<Assertion> evaluate_assertions(Study study, const io::CsvTable& report, double f0_ghz) {
  for (const auto& h : kReportHeader)
    if (report.column_index(h) < 0) throw FormatError("report.csv lacks column " + h);
  if (report.rows.size() < 2) throw FormatError("report.csv needs at least two rows");
  const auto res = report.numbers("resonance_GHz");
  const auto s11 = report.numbers("S11_res");
  const auto mc_orig = report.numbers("max_coupling_orig");
  const auto mc_f0 = report.numbers("max_coupling_f0");
  const auto bracketed = report.numbers("bracketed");
  const std::size_t last = res.size() - 1;
  const std::string f0s = io::fmt(f0_ghz, 3) + " GHz";
  const std::string forig = io::fmt(report.numbers("f_orig_GHz")[0], 4) + " GHz";
  std::vector<Assertion> out;
  auto cmp = [&](const std::string& name, bool hard, bool ok, const std::string& what, double a,
                 double b) {
    out.push_back({name, hard, ok, what + ": " + io::fmt(a, 6) + " -> " + io::fmt(b, 6)});
  };

  out.push_back({"all_resonances_bracketed", false,
                 std::all_of(bracketed.begin(), bracketed.end(), [](double v) { return v == 1.0; }),
                 "every sweep contains its |S11| minimum"});

  if (study == Study::optimal) {
    const auto cost = report.numbers("cost_f0");
    cmp("optimum_cost_not_above_baseline", true, cost[1] <= cost[0], "cost at " + f0s + " baseline -> optimum",
        cost[0], cost[1]);
    cmp("optimum_resonance", false, true, "resonance GHz baseline -> optimum", res[0], res[1]);
    return out;
  }

  std::vector<double> values = report.numbers(study == Study::length ? "h2_mm" : "h1_mm");
  if (study == Study::both) {
    const auto h2 = report.numbers("h2_mm");
    bool equal = true;
    for (std::size_t i = 0; i < h2.size(); ++i) equal = equal && h2[i] == values[i];
    out.push_back({"h1_equals_h2", true, equal, "both sides share one depth"});
  }

  if (study == Study::width) {
    cmp("resonance_shifts_up", true, res[last] > res[0], "resonance GHz", res[0], res[last]);
    const double rho = spearman(values, res);
    out.push_back({"resonance_rank_correlation", true, rho >= 0.8,
                   "Spearman(h1; resonance) = " + io::fmt(rho, 4) + " (need >= 0.8)"});
    cmp("coupling_decreases_at_original_f0", true, mc_orig[last] < mc_orig[0],
        "max coupling at " + forig, mc_orig[0], mc_orig[last]);
    cmp("coupling_decreases_at_f0", false, mc_f0[last] < mc_f0[0], "max coupling at " + f0s,
        mc_f0[0], mc_f0[last]);
    cmp("reflection_increases", false, s11[last] > s11[0], "|S11| at resonance", s11[0], s11[last]);
  } else if (study == Study::length) {
    cmp("resonance_shifts_down", true, res[last] < res[0], "resonance GHz", res[0], res[last]);
    const std::size_t arg = std::size_t(std::min_element(s11.begin(), s11.end()) - s11.begin());
    out.push_back({"s11_minimum_at_1mm", false, std::abs(values[arg] - 1.0) < 1e-9,
                   "argmin |S11| at h2 = " + io::fmt(values[arg], 2) + " mm (compare 1 mm)"});
    const auto s12 = report.numbers("S12_orig"), s13 = report.numbers("S13_orig"),
               s14 = report.numbers("S14_orig");
    cmp("s12_decreases", false, s12[last] < s12[0], "|S12| at " + forig, s12[0], s12[last]);
    cmp("s13_decreases", false, s13[last] < s13[0], "|S13| at " + forig, s13[0], s13[last]);
    cmp("s14_increases", false, s14[last] > s14[0], "|S14| at " + forig, s14[0], s14[last]);
  } else {
    cmp("coupling_decreases_at_original_f0", true, mc_orig[last] < mc_orig[0],
        "max coupling at " + forig, mc_orig[0], mc_orig[last]);
    cmp("coupling_decreases_at_f0", false, mc_f0[last] < mc_f0[0], "max coupling at " + f0s,
        mc_f0[0], mc_f0[last]);
    cmp("reflection_increases", false, s11[last] > s11[0], "|S11| at resonance", s11[0], s11[last]);
    cmp("resonance_shift", false, true, "resonance GHz", res[0], res[last]);
  }
  return out;
}

std::string render_study_svg(const fs::path& dir) {
  const io::CsvTable report = io::parse_csv(io::read_text(dir / "report.csv"));
  const int lc = report.column_index("label"), cc = report.column_index("csv");
  if (lc < 0 || cc < 0) throw FormatError(dir.string() + "/report.csv lacks label/csv columns");
  std::vector<io::Panel> panels;
  for (const char* s : {"S11", "S12", "S13", "S14"})
    panels.push_back({std::string("|") + s + "|", "frequency (GHz)", "dB", {}});
  for (const auto& row : report.rows) {
    const io::CsvTable pt = io::parse_csv(io::read_text(dir / row[cc]));
    const auto f = pt.numbers("freq_GHz");
    int k = 0;
    for (const char* s : {"S11", "S12", "S13", "S14"})
      panels[k++].series.push_back({row[lc], f, pt.numbers(std::string(s) + "_dB")});
  }
  return io::render_svg(panels, 2);
}

std::string regenerate_report(const fs::path& results) {
  if (!fs::is_directory(results)) throw FormatError(results.string() + " is not a directory");
  std::vector<fs::path> dirs;
  if (fs::exists(results / "report.csv")) dirs.push_back(results);
  std::vector<fs::path> subs;
  for (const auto& e : fs::directory_iterator(results))
    if (e.is_directory() && fs::exists(e.path() / "report.csv")) subs.push_back(e.path());
  std::sort(subs.begin(), subs.end());
  dirs.insert(dirs.end(), subs.begin(), subs.end());
  if (dirs.empty()) throw FormatError("no report.csv found under " + results.string());

  std::string md = "# Study summary\n";
  for (const auto& dir : dirs) {
    const io::CsvTable report = io::parse_csv(io::read_text(dir / "report.csv"));
    for (const char* h : {"label", "resonance_GHz", "S11_res", "max_coupling_orig",
                          "max_coupling_f0", "cost_f0"})
      if (report.column_index(h) < 0)
        throw FormatError((dir / "report.csv").string() + " lacks column " + h);
    io::write_text_atomic(dir / "summary.svg", render_study_svg(dir));

    const std::string name = dir == results ? results.filename().string() : dir.filename().string();
    md += "\n## " + name + "\n\n";
    md += "| design | resonance (GHz) | \\|S11\\| at resonance | max coupling at reference f0 | "
          "max coupling at target f0 | cost at target f0 |\n";
    md += "|---|---|---|---|---|---|\n";
    for (const auto& r : report.rows) {
      auto cell = [&](const char* h) { return r[report.column_index(h)]; };
      md += "| " + cell("label") + " | " + cell("resonance_GHz") + " | " + cell("S11_res") + " | " +
            cell("max_coupling_orig") + " | " + cell("max_coupling_f0") + " | " + cell("cost_f0") +
            " |\n";
    }
    if (fs::exists(dir / "assertions.csv")) {
      const io::CsvTable at = io::parse_csv(io::read_text(dir / "assertions.csv"));
      for (const char* h : {"assertion", "kind", "result", "detail"})
        if (at.column_index(h) < 0)
          throw FormatError((dir / "assertions.csv").string() + " lacks column " + h);
      md += "\n| check | kind | result | detail |\n|---|---|---|---|\n";
      for (const auto& r : at.rows)
        md += "| " + r[at.column_index("assertion")] + " | " + r[at.column_index("kind")] + " | " +
              r[at.column_index("result")] + " | " + r[at.column_index("detail")] + " |\n";
    }
  }
  io::write_text_atomic(results / "summary.md", md);
  return md;
}

}  // namespace carray::experiments
