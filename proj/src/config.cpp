// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/config.hpp"

#include <json.hpp>

#include <set>

#include "carray/io.hpp"

namespace carray::config {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Reads one JSON object, remembering which keys were consumed so that the
// rest can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  void num(const char* key, double& dst) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(name(key) + " must be a number");
      dst = v->get<double>();
    }
  }
  void integer(const char* key, int& dst) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(name(key) + " must be an integer");
      const auto x = v->get<std::int64_t>();
      if (x < -2147483647 || x > 2147483647) throw ConfigError(name(key) + " is out of range");
      dst = int(x);
    }
  }
  void u64(const char* key, std::uint64_t& dst) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(name(key) + " must be a non-negative integer");
      dst = v->get<std::uint64_t>();
    }
  }
  void boolean(const char* key, bool& dst) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(name(key) + " must be true or false");
      dst = v->get<bool>();
    }
  }
  void str(const char* key, std::string& dst) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(name(key) + " must be a string");
      dst = v->get<std::string>();
    }
  }
  void numbers(const char* key, std::vector<double>& dst, std::size_t exact = 0) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(name(key) + " must be an array of numbers");
      if (exact && v->size() != exact)
        throw ConfigError(name(key) + " must hold exactly " + std::to_string(exact) + " numbers");
      std::vector<double> out;
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(name(key) + " must be an array of numbers");
        out.push_back(e.get<double>());
      }
      dst = std::move(out);
    }
  }
  template <class F>
  void object(const char* key, F&& f) {
    if (const json* v = take(key)) {
      Reader r(*v, path_.empty() ? std::string(key) : path_ + "." + key);
      f(r);
      r.finish();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError("unknown key " + name(it.key().c_str()));
  }

 private:
  const json* take(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string name(const char* key) const {
    return "'" + (path_.empty() ? std::string(key) : path_ + "." + key) + "'";
  }
  std::string where() const { return path_.empty() ? "the config" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_design(Reader& r, geometry::PatchDesign& d) {
  r.num("W", d.W);
  r.num("L", d.L);
  r.num("h1", d.h1);
  r.num("h2", d.h2);
  r.num("ins", d.ins);
}

ojson design_json(const geometry::PatchDesign& d) {
  ojson j;
  j["W"] = d.W;
  j["L"] = d.L;
  j["h1"] = d.h1;
  j["h2"] = d.h2;
  j["ins"] = d.ins;
  return j;
}

// Re-raise scene-level errors as configuration errors, optionally renaming
// the key prefix.
template <class F>
void as_config(F&& f, const std::string& from = "", const std::string& to = "") {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    std::string m = e.what();
    if (!from.empty() && m.rfind(from, 0) == 0) m = to + m.substr(from.size());
    throw ConfigError(m);
  }
}

}  // namespace

RunConfig parse(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Reader r(j, "");
  r.object("stack", [&](Reader& s) {
    s.num("d1", c.stack.d1);
    s.num("d2", c.stack.d2);
    s.num("eps_r", c.stack.eps_r);
    s.num("mu_r", c.stack.mu_r);
  });
  r.object("design", [&](Reader& s) { read_design(s, c.design); });
  r.object("layout", [&](Reader& s) {
    s.integer("nx", c.layout.nx);
    s.integer("ny", c.layout.ny);
    s.num("dx", c.layout.dx);
    s.num("dy", c.layout.dy);
  });
  r.object("feed", [&](Reader& s) {
    s.num("trace_width", c.feed.trace_width);
    s.num("leg1_len", c.feed.leg1_len);
    s.num("leg2_len", c.feed.leg2_len);
    s.num("port_strip_len", c.feed.port_strip_len);
  });
  r.object("mesh", [&](Reader& s) { s.num("max_edge_len", c.max_edge_mm); });
  r.object("solver", [&](Reader& s) {
    s.integer("quadrature_order", c.solver.quadrature_order);
    s.boolean("singularity_extraction", c.solver.singularity_extraction);
    s.num("eps_eff", c.solver.eps_eff);
    s.num("z0", c.solver.z0);
    s.num("pivot_tolerance", c.solver.pivot_tolerance);
    s.num("near_factor", c.solver.near_factor);
    s.boolean("use_symmetry", c.solver.use_symmetry);
  });
  r.object("sweep", [&](Reader& s) {
    s.num("f_start", c.f_start);
    s.num("f_stop", c.f_stop);
    s.integer("points", c.points);
    s.num("widen", c.widen);
  });
  r.object("study", [&](Reader& s) {
    s.numbers("values", c.values);
    s.num("f0", c.f0);
    s.object("optimum", [&](Reader& o) { read_design(o, c.optimum); });
  });
  r.object("cost", [&](Reader& s) {
    s.num("reflection", c.weights.reflection);
    s.num("coupling", c.weights.coupling);
  });
  r.object("ga", [&](Reader& s) {
    s.integer("population", c.ga.population);
    s.integer("generations", c.ga.generations);
    s.num("pc", c.ga.pc);
    s.num("pm", c.ga.pm);
    s.num("pc_min", c.ga.pc_min);
    s.num("pc_max", c.ga.pc_max);
    s.num("pm_min", c.ga.pm_min);
    s.num("pm_max", c.ga.pm_max);
    s.integer("tournament", c.ga.tournament);
    s.integer("elite", c.ga.elite);
    s.num("alpha", c.ga.alpha);
    s.num("sigma_fraction", c.ga.sigma_fraction);
    s.integer("stagnation_window", c.ga.stagnation_window);
    s.boolean("adaptive", c.ga.adaptive);
    s.num("max_failure_fraction", c.ga.max_failure_fraction);
    s.object("bounds", [&](Reader& b) {
      for (std::size_t i = 0; i < c.bounds.size(); ++i) {
        std::vector<double> lohi{c.bounds.lo[i], c.bounds.hi[i]};
        b.numbers(c.bounds.names[i].c_str(), lohi, 2);
        c.bounds.lo[i] = lohi[0];
        c.bounds.hi[i] = lohi[1];
      }
    });
  });
  r.u64("seed", c.ga.seed);
  r.str("out", c.out);
  r.str("cache", c.cache);
  r.integer("threads", c.threads);
  r.finish();
  return c;
}

RunConfig load(const std::string& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse(text);
}

void RunConfig::validate() const {
  as_config([&] { stack.validate(); });
  as_config([&] { design.validate(); });
  as_config([&] { layout.validate(); });
  as_config([&] { feed.validate(); });
  as_config([&] { optimum.validate(); }, "design.", "study.optimum.");
  solver.validate();
  if (!(max_edge_mm > 0.0)) throw ConfigError("mesh.max_edge_len must be > 0 mm");
  if (!(weights.reflection >= 0.0 && weights.coupling >= 0.0))
    throw ConfigError("cost.reflection and cost.coupling must be >= 0");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  as_config([&] { settings().validate(); });
  ga.validate();
  bounds.validate();
  as_config([&] {
    const auto scene = geometry::build_scene(design, layout, feed, stack);
    const auto v = geometry::validate_scene(scene);
    if (!v.empty()) throw GeometryError("scene: " + v.front().message);
  });
}

experiments::Settings RunConfig::settings() const {
  experiments::Settings s;
  s.base = design;
  s.layout = layout;
  s.feed = feed;
  s.stack = stack;
  s.solver = solver;
  s.max_edge_mm = max_edge_mm;
  s.values = values;
  s.f_start = f_start;
  s.f_stop = f_stop;
  s.points = points;
  s.widen = widen;
  s.f0 = f0;
  s.optimum = optimum;
  s.weights = weights;
  return s;
}

opt::AntennaProblem RunConfig::problem() const {
  opt::AntennaProblem p;
  p.layout = layout;
  p.feed = feed;
  p.stack = stack;
  p.solver = solver;
  p.max_edge_mm = max_edge_mm;
  p.f0_ghz = f0;
  p.weights = weights;
  return p;
}

std::string to_json(const RunConfig& c) {
  ojson j;
  j["stack"] = {{"d1", c.stack.d1}, {"d2", c.stack.d2}, {"eps_r", c.stack.eps_r},
                {"mu_r", c.stack.mu_r}};
  j["design"] = design_json(c.design);
  j["layout"] = {{"nx", c.layout.nx}, {"ny", c.layout.ny}, {"dx", c.layout.dx},
                 {"dy", c.layout.dy}};
  j["feed"] = {{"trace_width", c.feed.trace_width},
               {"leg1_len", c.feed.leg1_len},
               {"leg2_len", c.feed.leg2_len},
               {"port_strip_len", c.feed.port_strip_len}};
  j["mesh"] = {{"max_edge_len", c.max_edge_mm}};
  j["solver"] = {{"quadrature_order", c.solver.quadrature_order},
                 {"singularity_extraction", c.solver.singularity_extraction},
                 {"eps_eff", c.solver.eps_eff},
                 {"z0", c.solver.z0},
                 {"pivot_tolerance", c.solver.pivot_tolerance},
                 {"near_factor", c.solver.near_factor},
                 {"use_symmetry", c.solver.use_symmetry}};
  j["sweep"] = {{"f_start", c.f_start}, {"f_stop", c.f_stop}, {"points", c.points},
                {"widen", c.widen}};
  ojson study;
  study["values"] = c.values;
  study["f0"] = c.f0;
  study["optimum"] = design_json(c.optimum);
  j["study"] = study;
  j["cost"] = {{"reflection", c.weights.reflection}, {"coupling", c.weights.coupling}};
  ojson ga;
  ga["population"] = c.ga.population;
  ga["generations"] = c.ga.generations;
  ga["pc"] = c.ga.pc;
  ga["pm"] = c.ga.pm;
  ga["pc_min"] = c.ga.pc_min;
  ga["pc_max"] = c.ga.pc_max;
  ga["pm_min"] = c.ga.pm_min;
  ga["pm_max"] = c.ga.pm_max;
  ga["tournament"] = c.ga.tournament;
  ga["elite"] = c.ga.elite;
  ga["alpha"] = c.ga.alpha;
  ga["sigma_fraction"] = c.ga.sigma_fraction;
  ga["stagnation_window"] = c.ga.stagnation_window;
  ga["adaptive"] = c.ga.adaptive;
  ga["max_failure_fraction"] = c.ga.max_failure_fraction;
  ojson bounds;
  for (std::size_t i = 0; i < c.bounds.size(); ++i)
    bounds[c.bounds.names[i]] = {c.bounds.lo[i], c.bounds.hi[i]};
  ga["bounds"] = bounds;
  j["ga"] = ga;
  j["seed"] = c.ga.seed;
  j["out"] = c.out;
  j["cache"] = c.cache;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

}  // namespace carray::config
