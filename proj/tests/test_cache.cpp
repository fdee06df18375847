// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <set>

#include "carray/cache.hpp"
#include "carray/io.hpp"

using namespace carray;

namespace {

geometry::SceneGeometry scene(const geometry::PatchDesign& d = {}) {
  return geometry::build_scene(d, {}, {}, {});
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("carray_test_cache_" + name);
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hexfloat, ExactRoundTrip) {
  for (double v : {0.0, 1.0, -2.5, 0.1, 8.55, 1e-300, 6.02214076e23}) {
    EXPECT_EQ(std::strtod(hexfloat(v).c_str(), nullptr), v);
  }
}

TEST(CacheKey, SensitiveToEveryInput) {
  const em::SolverConfig cfg;
  const auto base = scene();
  std::set<std::string> keys;
  keys.insert(ResultCache::key(base, 1.2, cfg, 8.55));
  EXPECT_EQ(ResultCache::key(base, 1.2, cfg, 8.55), *keys.begin());

  auto add = [&](const geometry::SceneGeometry& s, double edge, const em::SolverConfig& c,
                 double f) { return keys.insert(ResultCache::key(s, edge, c, f)).second; };
  EXPECT_TRUE(add(base, 1.2, cfg, std::nextafter(8.55, 9.0)));
  EXPECT_TRUE(add(base, 1.25, cfg, 8.55));
  geometry::PatchDesign d;
  d.h1 = 0.25;
  EXPECT_TRUE(add(scene(d), 1.2, cfg, 8.55));
  d = {};
  d.ins = 2.5;
  EXPECT_TRUE(add(scene(d), 1.2, cfg, 8.55));
  auto s = base;
  s.stack.eps_r = 3.01;
  EXPECT_TRUE(add(s, 1.2, cfg, 8.55));
  s = base;
  s.layout.dx += 1e-9;
  EXPECT_TRUE(add(s, 1.2, cfg, 8.55));
  s = base;
  s.feed.leg2_len = 7.0;
  EXPECT_TRUE(add(s, 1.2, cfg, 8.55));
  em::SolverConfig c = cfg;
  c.quadrature_order = 3;
  EXPECT_TRUE(add(base, 1.2, c, 8.55));
  c = cfg;
  c.singularity_extraction = !cfg.singularity_extraction;
  EXPECT_TRUE(add(base, 1.2, c, 8.55));
  c = cfg;
  c.z0 = 75.0;
  EXPECT_TRUE(add(base, 1.2, c, 8.55));
  c = cfg;
  c.use_symmetry = false;
  EXPECT_TRUE(add(base, 1.2, c, 8.55));

  for (const auto& k : keys) {
    EXPECT_EQ(k.size(), 64u);
    EXPECT_EQ(k.find_first_not_of("0123456789abcdef"), std::string::npos);
  }
}

TEST(ResultCache, StoreLoadBitIdentical) {
  const ResultCache cache(scratch_dir("store"));
  em::Matrix4c s;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s(i, j) = {0.1 * i - 1.0 / 3.0, std::sqrt(2.0) * j - 1e-17};
  const std::string k = sha256_hex("x");
  EXPECT_FALSE(cache.load(k).has_value());
  EXPECT_EQ(cache.misses(), 1u);
  cache.store(k, s);
  const auto back = cache.load(k);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(cache.hits(), 1u);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      EXPECT_EQ((*back)(i, j).real(), s(i, j).real());
      EXPECT_EQ((*back)(i, j).imag(), s(i, j).imag());
    }
}

TEST(ResultCache, NoTemporaryFilesRemain) {
  const auto dir = scratch_dir("atomic");
  const ResultCache cache(dir);
  const em::Matrix4c s = em::Matrix4c::Identity();
  for (int n = 0; n < 20; ++n) cache.store(sha256_hex(std::to_string(n)), s);
  int records = 0, other = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    (e.path().extension() == ".rec" ? records : other) += 1;
  }
  EXPECT_EQ(records, 20);
  EXPECT_EQ(other, 0);
}

TEST(ResultCache, CorruptRecordIsAMiss) {
  const auto dir = scratch_dir("corrupt");
  const ResultCache cache(dir);
  const std::string k = sha256_hex("y");
  cache.store(k, em::Matrix4c::Identity());
  io::write_text_atomic(dir / k.substr(0, 2) / (k + ".rec"), "carray-result-v1\n" + k + "\n1 2\n");
  EXPECT_FALSE(cache.load(k).has_value());
  io::write_text_atomic(dir / k.substr(0, 2) / (k + ".rec"), "other\n");
  EXPECT_FALSE(cache.load(k).has_value());
}

TEST(ResultCache, SweepHitsAreBitIdentical) {
  const auto dir = scratch_dir("sweep");
  const ResultCache cache(dir);
  const em::SolverConfig cfg;
  const auto sc = scene();
  const auto hooks = cache.hooks(sc, 2.4, cfg);

  em::Simulator cold(sc, 2.4, cfg);
  const auto first = em::frequency_sweep(cold, 8.0, 9.0, 3, &hooks);
  EXPECT_EQ(cold.assemble_calls(), 3u);
  EXPECT_EQ(cache.misses(), 3u);

  em::Simulator warm(sc, 2.4, cfg);
  const auto second = em::frequency_sweep(warm, 8.0, 9.0, 3, &hooks);
  EXPECT_EQ(warm.assemble_calls(), 0u);
  EXPECT_EQ(cache.hits(), 3u);
  ASSERT_EQ(first.rows.size(), second.rows.size());
  for (std::size_t r = 0; r < first.rows.size(); ++r)
    EXPECT_EQ(io::format_touchstone({{first.rows[r]}}, 50.0),
              io::format_touchstone({{second.rows[r]}}, 50.0));
  for (std::size_t r = 0; r < first.rows.size(); ++r)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) EXPECT_EQ(first.rows[r].s(i, j), second.rows[r].s(i, j));
}
