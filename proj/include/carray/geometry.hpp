// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_GEOMETRY_HPP
#define CARRAY_GEOMETRY_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "carray/common.hpp"

// Parametric description of the 2x2 proximity-fed concave patch array.
// All lengths in this header are millimetres.
namespace carray::geometry {

struct StackUp {
  double d1 = 0.5;    // ground -> feed layer
  double d2 = 0.5;    // feed layer -> patch layer
  double eps_r = 3.0;
  double mu_r = 1.0;

  double feed_z() const { return d1; }
  double patch_z() const { return d1 + d2; }
  void validate() const;
};

// The five optimisation variables. h1 notches the two sides of length W,
// h2 notches the two sides of length L.
struct PatchDesign {
  double W = 11.55;
  double L = 9.45;
  double h1 = 0.0;
  double h2 = 0.0;
  double ins = 2.531;

  void validate() const;
  friend bool operator==(const PatchDesign&, const PatchDesign&) = default;
};

struct ArrayLayout {
  int nx = 2;
  int ny = 2;
  double dx = 14.08;
  double dy = 20.55;

  void validate() const;
};

// trace_width <= 0 means "synthesise for a 50 ohm line at the feed layer".
struct FeedSpec {
  double trace_width = 0.0;
  double leg1_len = 6.0;
  double leg2_len = 8.0;
  double port_strip_len = 0.0;  // 0 -> d1

  void validate() const;
};

enum class Label { patch, feed, probe };
const char* to_string(Label label);

// Planar conductor. Patches and feeds are horizontal (all vertices share z);
// probes are vertical rectangles standing on the ground plane.
struct Polygon {
  std::vector<Vec3> vertices;
  Label label = Label::patch;
  int element = 0;

  bool horizontal() const;
  double z() const { return vertices.empty() ? 0.0 : vertices.front().z; }
  std::vector<Vec2> outline_xy() const;
};

// Port i (0-based) is driven at the ground end of probe polygon `probe`.
// `feed_edge` is the index of the feed polygon edge the probe top joins.
struct Port {
  int probe = -1;
  int feed = -1;
  int feed_edge = -1;
  int element = -1;
};

struct SceneGeometry {
  StackUp stack;
  PatchDesign design;
  ArrayLayout layout;
  FeedSpec feed;  // with trace_width resolved
  std::vector<Polygon> polygons;
  std::vector<Port> ports;
};

// Element e sits at (sx*dx/2, sy*dy/2). Bit 0 of e mirrors x, bit 1 mirrors y,
// relative to element 0 at (-dx/2, +dy/2). Port numbering follows e + 1, so the
// x reflection swaps ports 1<->2, 3<->4 and the y reflection swaps 1<->3, 2<->4.
inline constexpr int kElements = 4;
inline constexpr std::array<int, 4> kElementSx = {-1, +1, -1, +1};
inline constexpr std::array<int, 4> kElementSy = {+1, +1, -1, -1};

// Quasi-static (Hammerstad-Jensen) synthesis of the strip width giving the
// requested characteristic impedance on a substrate of height h.
double microstrip_width_for_impedance(double z0, double eps_r, double h);
// Inverse direction, used to report the achieved impedance.
double microstrip_impedance(double width, double eps_r, double h);

double resolved_trace_width(const FeedSpec& feed, const StackUp& stack);

Polygon concave_outline(const PatchDesign& design);
Polygon feed_outline(const PatchDesign& design, const FeedSpec& feed, const StackUp& stack,
                     const ArrayLayout& layout, int element);
Polygon probe_outline(const PatchDesign& design, const FeedSpec& feed, const StackUp& stack,
                      const ArrayLayout& layout, int element);

SceneGeometry build_scene(const PatchDesign& design, const ArrayLayout& layout,
                          const FeedSpec& feed, const StackUp& stack);

struct Violation {
  std::string kind;  // "polygon", "layer_conflict", "port_count", "layer_height"
  std::string message;
  std::vector<int> polygons;
};

std::vector<Violation> validate_scene(const SceneGeometry& scene);

// Plain polygon helpers (2D, mm).
double signed_area(std::span<const Vec2> poly);
bool is_simple(std::span<const Vec2> poly);
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);
// Closed-set intersection: touching boundaries count as overlap.
bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b);
double polygon_area(const Polygon& poly);

Vec3 mirror_point(Vec3 p, int mirror_bits);
Polygon mirror_polygon(const Polygon& poly, int mirror_bits);

std::string scene_to_json(const SceneGeometry& scene);

}  // namespace carray::geometry

#endif  // CARRAY_GEOMETRY_HPP
