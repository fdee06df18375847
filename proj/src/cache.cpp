// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/cache.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "carray/io.hpp"

namespace carray {

namespace {

constexpr const char* kFormat = "carray-result-v1";

}  // namespace

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
    throw Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

ResultCache::ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ResultCache::canonical(const geometry::SceneGeometry& scene, double max_edge_mm,
                                   const em::SolverConfig& cfg, double freq_ghz) {
  std::ostringstream s;
  auto kv = [&](const char* k, double v) { s << k << '=' << hexfloat(v) << '\n'; };
  s << kFormat << '\n';
  kv("stack.d1", scene.stack.d1);
  kv("stack.d2", scene.stack.d2);
  kv("stack.eps_r", scene.stack.eps_r);
  kv("stack.mu_r", scene.stack.mu_r);
  kv("design.W", scene.design.W);
  kv("design.L", scene.design.L);
  kv("design.h1", scene.design.h1);
  kv("design.h2", scene.design.h2);
  kv("design.ins", scene.design.ins);
  kv("layout.dx", scene.layout.dx);
  kv("layout.dy", scene.layout.dy);
  kv("feed.trace_width", scene.feed.trace_width);
  kv("feed.leg1_len", scene.feed.leg1_len);
  kv("feed.leg2_len", scene.feed.leg2_len);
  kv("feed.port_strip_len", scene.feed.port_strip_len);
  kv("mesh.max_edge_len", max_edge_mm);
  s << "solver.quadrature_order=" << cfg.quadrature_order << '\n';
  s << "solver.singularity_extraction=" << int(cfg.singularity_extraction) << '\n';
  kv("solver.eps_eff", cfg.eps_eff);
  kv("solver.z0", cfg.z0);
  kv("solver.pivot_tolerance", cfg.pivot_tolerance);
  kv("solver.near_factor", cfg.near_factor);
  s << "solver.use_symmetry=" << int(cfg.use_symmetry) << '\n';
  kv("freq_GHz", freq_ghz);
  return s.str();
}

std::string ResultCache::key(const geometry::SceneGeometry& scene, double max_edge_mm,
                             const em::SolverConfig& cfg, double freq_ghz) {
  return sha256_hex(canonical(scene, max_edge_mm, cfg, freq_ghz));
}

std::filesystem::path ResultCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".rec");
}

std::optional<em::Matrix4c> ResultCache::load(const std::string& key) const {
  const auto p = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(p, ec)) {
    ++misses_;
    return std::nullopt;
  }
  std::istringstream in(io::read_text(p));
  std::string tag, stored;
  in >> tag >> stored;
  if (tag != kFormat || stored != key) {
    ++misses_;
    return std::nullopt;
  }
  em::Matrix4c s;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      std::string re, im;
      if (!(in >> re >> im)) {
        ++misses_;
        return std::nullopt;
      }
      s(i, j) = {std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr)};
    }
  ++hits_;
  return s;
}

void ResultCache::store(const std::string& key, const em::Matrix4c& s) const {
  std::string rec = std::string(kFormat) + "\n" + key + "\n";
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j)
      rec += hexfloat(s(i, j).real()) + " " + hexfloat(s(i, j).imag()) + (j < 3 ? " " : "");
    rec += "\n";
  }
  io::write_text_atomic(path_for(key), rec);
}

em::SweepCache ResultCache::hooks(const geometry::SceneGeometry& scene, double max_edge_mm,
                                  const em::SolverConfig& cfg) const {
  em::SweepCache c;
  c.load = [=, this](double f) { return load(key(scene, max_edge_mm, cfg, f)); };
  c.store = [=, this](double f, const em::Matrix4c& s) {
    store(key(scene, max_edge_mm, cfg, f), s);
  };
  return c;
}

}  // namespace carray
