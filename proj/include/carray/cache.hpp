// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_CACHE_HPP
#define CARRAY_CACHE_HPP

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>

#include "carray/em.hpp"
#include "carray/geometry.hpp"

namespace carray {

// Content-addressed store of solved S matrices, one record per frequency
// point. The key is the SHA-256 of a canonical hexfloat serialisation of
// every input that affects the result.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  static std::string canonical(const geometry::SceneGeometry& scene, double max_edge_mm,
                               const em::SolverConfig& cfg, double freq_ghz);
  static std::string key(const geometry::SceneGeometry& scene, double max_edge_mm,
                         const em::SolverConfig& cfg, double freq_ghz);

  std::optional<em::Matrix4c> load(const std::string& key) const;
  void store(const std::string& key, const em::Matrix4c& s) const;

  // Hooks for em::frequency_sweep bound to one scene and mesh setting.
  em::SweepCache hooks(const geometry::SceneGeometry& scene, double max_edge_mm,
                       const em::SolverConfig& cfg) const;

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path dir_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

std::string sha256_hex(const std::string& data);
std::string hexfloat(double v);

}  // namespace carray

#endif  // CARRAY_CACHE_HPP
