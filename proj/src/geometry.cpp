// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace carray::geometry {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Orientation of c relative to a->b with a relative dead band.
int orient(Vec2 a, Vec2 b, Vec2 c) {
  const double det = cross(b - a, c - a);
  const double scale = std::max({std::abs(b.x - a.x), std::abs(b.y - a.y), std::abs(c.x - a.x),
                                 std::abs(c.y - a.y), 1e-300});
  if (std::abs(det) <= 1e-12 * scale * scale) return 0;
  return det > 0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

// Closed segment intersection (touching counts).
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orient(a, b, c);
  const int o2 = orient(a, b, d);
  const int o3 = orient(c, d, a);
  const int o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool point_on_boundary(Vec2 p, std::span<const Vec2> poly) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    if (orient(a, b, p) == 0 && on_segment(a, b, p)) return true;
  }
  return false;
}

// Maps a point given in the element-local (+x,+y) frame into element e.
Vec3 place(double x, double y, double z, const ArrayLayout& layout, int element) {
  const double sx = kElementSx[element];
  const double sy = kElementSy[element];
  return {sx * (0.5 * layout.dx + x), sy * (0.5 * layout.dy + y), z};
}

Polygon place_polygon(std::span<const Vec2> local, double z, Label label,
                      const ArrayLayout& layout, int element) {
  Polygon out;
  out.label = label;
  out.element = element;
  out.vertices.reserve(local.size());
  for (const Vec2& v : local) out.vertices.push_back(place(v.x, v.y, z, layout, element));
  if (kElementSx[element] * kElementSy[element] < 0)
    std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

void check_element(int element) {
  if (element < 0 || element >= kElements)
    throw GeometryError("element index must be in [0, 3], got " + std::to_string(element));
}

// Feed strip in the element-local (+x,+y) frame, element centre at the origin.
// The terminal leg runs along y under the patch; the first leg runs along +x
// away from the patch and ends at the probe.
std::vector<Vec2> local_feed(const PatchDesign& d, const FeedSpec& f, double width) {
  const double half = 0.5 * width;
  const double tip = 0.5 * d.L - d.ins;
  const double bend = 0.5 * d.L + f.leg2_len;
  return {{-half, tip},          {half, tip},           {half, bend - half},
          {f.leg1_len, bend - half}, {f.leg1_len, bend + half}, {-half, bend + half}};
}

}  // namespace

const char* to_string(Label label) {
  switch (label) {
    case Label::patch: return "patch";
    case Label::feed: return "feed";
    case Label::probe: return "probe";
  }
  return "unknown";
}

void StackUp::validate() const {
  if (!(d1 > 0.0)) throw GeometryError("stack.d1 must be > 0 mm, got " + fmt(d1));
  if (!(d2 > 0.0)) throw GeometryError("stack.d2 must be > 0 mm, got " + fmt(d2));
  if (!(eps_r >= 1.0)) throw GeometryError("stack.eps_r must be >= 1, got " + fmt(eps_r));
  if (!(mu_r >= 1.0)) throw GeometryError("stack.mu_r must be >= 1, got " + fmt(mu_r));
}

void PatchDesign::validate() const {
  if (!(W > 0.0)) throw GeometryError("design.W must be > 0 mm, got " + fmt(W));
  if (!(L > 0.0)) throw GeometryError("design.L must be > 0 mm, got " + fmt(L));
  if (!(h1 >= 0.0 && h1 < 0.5 * L))
    throw GeometryError("design.h1 must satisfy 0 <= h1 < L/2 (= " + fmt(0.5 * L) + " mm), got " +
                        fmt(h1));
  if (!(h2 >= 0.0 && h2 < 0.5 * W))
    throw GeometryError("design.h2 must satisfy 0 <= h2 < W/2 (= " + fmt(0.5 * W) + " mm), got " +
                        fmt(h2));
  if (!(ins >= 0.0 && ins <= L))
    throw GeometryError("design.ins must satisfy 0 <= ins <= L (= " + fmt(L) + " mm), got " +
                        fmt(ins));
}

void ArrayLayout::validate() const {
  if (nx != 2 || ny != 2) throw GeometryError("layout must be 2x2 (nx = ny = 2)");
  if (!(dx > 0.0)) throw GeometryError("layout.dx must be > 0 mm, got " + fmt(dx));
  if (!(dy > 0.0)) throw GeometryError("layout.dy must be > 0 mm, got " + fmt(dy));
}

void FeedSpec::validate() const {
  if (!(trace_width >= 0.0) || !std::isfinite(trace_width))
    throw GeometryError("feed.trace_width must be > 0 mm (or 0 for automatic), got " +
                        fmt(trace_width));
  if (!(leg1_len > 0.0)) throw GeometryError("feed.leg1_len must be > 0 mm, got " + fmt(leg1_len));
  if (!(leg2_len > 0.0)) throw GeometryError("feed.leg2_len must be > 0 mm, got " + fmt(leg2_len));
  if (!(port_strip_len >= 0.0))
    throw GeometryError("feed.port_strip_len must be >= 0 mm, got " + fmt(port_strip_len));
}

double microstrip_width_for_impedance(double z0, double eps_r, double h) {
  if (!(z0 > 0.0) || !(eps_r >= 1.0) || !(h > 0.0))
    throw GeometryError("microstrip synthesis needs z0 > 0, eps_r >= 1, h > 0");
  const double a = z0 / 60.0 * std::sqrt(0.5 * (eps_r + 1.0)) +
                   (eps_r - 1.0) / (eps_r + 1.0) * (0.23 + 0.11 / eps_r);
  double u = 8.0 * std::exp(a) / (std::exp(2.0 * a) - 2.0);
  if (u > 2.0 || u <= 0.0) {
    const double b = 377.0 * constants::pi / (2.0 * z0 * std::sqrt(eps_r));
    u = 2.0 / constants::pi *
        (b - 1.0 - std::log(2.0 * b - 1.0) +
         (eps_r - 1.0) / (2.0 * eps_r) * (std::log(b - 1.0) + 0.39 - 0.61 / eps_r));
  }
  return u * h;
}

double microstrip_impedance(double width, double eps_r, double h) {
  const double u = width / h;
  double e_eff = 0.5 * (eps_r + 1.0) + 0.5 * (eps_r - 1.0) / std::sqrt(1.0 + 12.0 / u);
  if (u < 1.0) e_eff += 0.5 * (eps_r - 1.0) * 0.04 * (1.0 - u) * (1.0 - u);
  if (u <= 1.0) return 60.0 / std::sqrt(e_eff) * std::log(8.0 / u + 0.25 * u);
  return 120.0 * constants::pi /
         (std::sqrt(e_eff) * (u + 1.393 + 0.667 * std::log(u + 1.444)));
}

double resolved_trace_width(const FeedSpec& feed, const StackUp& stack) {
  if (feed.trace_width > 0.0) return feed.trace_width;
  return microstrip_width_for_impedance(50.0, stack.eps_r, stack.d1);
}

bool Polygon::horizontal() const {
  return std::all_of(vertices.begin(), vertices.end(),
                     [&](const Vec3& v) { return v.z == vertices.front().z; });
}

std::vector<Vec2> Polygon::outline_xy() const {
  std::vector<Vec2> out;
  out.reserve(vertices.size());
  for (const Vec3& v : vertices) out.push_back({v.x, v.y});
  return out;
}

double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

double polygon_area(const Polygon& poly) {
  if (poly.horizontal()) return std::abs(signed_area(poly.outline_xy()));
  // Vector area for planar polygons in arbitrary orientation.
  Vec3 acc;
  for (std::size_t i = 0; i < poly.vertices.size(); ++i)
    acc += cross(poly.vertices[i], poly.vertices[(i + 1) % poly.vertices.size()]);
  return 0.5 * norm(acc);
}

bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 c = poly[j];
      const Vec2 d = poly[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges may only share their common vertex: reject folds.
        const Vec2 shared = (j == i + 1) ? b : a;
        const Vec2 p = (j == i + 1) ? a : b;
        const Vec2 q = (j == i + 1) ? d : c;
        if (orient(p, shared, q) == 0 && dot(p - shared, q - shared) > 0) return false;
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]))
        return true;
  if (point_in_polygon(a.front(), b) || point_on_boundary(a.front(), b)) return true;
  if (point_in_polygon(b.front(), a) || point_on_boundary(b.front(), a)) return true;
  return false;
}

Vec3 mirror_point(Vec3 p, int mirror_bits) {
  if (mirror_bits & 1) p.x = -p.x;
  if (mirror_bits & 2) p.y = -p.y;
  return p;
}

Polygon mirror_polygon(const Polygon& poly, int mirror_bits) {
  Polygon out = poly;
  for (Vec3& v : out.vertices) v = mirror_point(v, mirror_bits);
  out.element = poly.element ^ mirror_bits;
  const bool flips = ((mirror_bits & 1) != 0) != ((mirror_bits & 2) != 0);
  if (flips && poly.label != Label::probe) std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

Polygon concave_outline(const PatchDesign& design) {
  design.validate();
  const double hw = 0.5 * design.W;
  const double hl = 0.5 * design.L;
  // Counter-clockwise from the lower-left corner. Sides of length W lie at
  // y = +-L/2 and take the h1 notch; sides of length L take h2.
  std::vector<Vec3> v;
  v.push_back({-hw, -hl, 0.0});
  if (design.h1 > 0.0) v.push_back({0.0, -hl + design.h1, 0.0});
  v.push_back({hw, -hl, 0.0});
  if (design.h2 > 0.0) v.push_back({hw - design.h2, 0.0, 0.0});
  v.push_back({hw, hl, 0.0});
  if (design.h1 > 0.0) v.push_back({0.0, hl - design.h1, 0.0});
  v.push_back({-hw, hl, 0.0});
  if (design.h2 > 0.0) v.push_back({-hw + design.h2, 0.0, 0.0});
  Polygon out;
  out.vertices = std::move(v);
  out.label = Label::patch;
  return out;
}

Polygon feed_outline(const PatchDesign& design, const FeedSpec& feed, const StackUp& stack,
                     const ArrayLayout& layout, int element) {
  design.validate();
  feed.validate();
  stack.validate();
  check_element(element);
  const double width = resolved_trace_width(feed, stack);
  if (feed.leg1_len <= 0.5 * width)
    throw GeometryError("feed.leg1_len must exceed half the trace width (" + fmt(0.5 * width) +
                        " mm) so the probe clears the terminal leg");
  if (feed.leg2_len <= 0.5 * width)
    throw GeometryError("feed.leg2_len must exceed half the trace width (" + fmt(0.5 * width) +
                        " mm) so the first leg clears the patch");
  if (width >= design.W)
    throw GeometryError("feed trace width " + fmt(width) + " mm exceeds the patch width");
  // Probe footprint must lie outside the patch rectangle.
  const double probe_y_lo = 0.5 * design.L + feed.leg2_len - 0.5 * width;
  if (probe_y_lo <= 0.5 * design.L && feed.leg1_len <= 0.5 * design.W)
    throw GeometryError("probe location lies under the patch; lengthen the feed legs");
  const auto local = local_feed(design, feed, width);
  return place_polygon(local, stack.feed_z(), Label::feed, layout, element);
}

Polygon probe_outline(const PatchDesign& design, const FeedSpec& feed, const StackUp& stack,
                      const ArrayLayout& layout, int element) {
  check_element(element);
  const double width = resolved_trace_width(feed, stack);
  const auto local = local_feed(design, feed, width);
  // The probe stands under feed edge 3 of the local strip.
  const Vec2 a = local[3];
  const Vec2 b = local[4];
  const double h = stack.d1;
  Polygon out;
  out.label = Label::probe;
  out.element = element;
  out.vertices = {place(a.x, a.y, 0.0, layout, element), place(b.x, b.y, 0.0, layout, element),
                  place(b.x, b.y, h, layout, element), place(a.x, a.y, h, layout, element)};
  return out;
}

SceneGeometry build_scene(const PatchDesign& design, const ArrayLayout& layout,
                          const FeedSpec& feed, const StackUp& stack) {
  stack.validate();
  design.validate();
  layout.validate();
  feed.validate();
  if (feed.port_strip_len != 0.0 && std::abs(feed.port_strip_len - stack.d1) > 1e-12)
    throw GeometryError("feed.port_strip_len must equal stack.d1 (" + fmt(stack.d1) + " mm)");

  SceneGeometry scene;
  scene.stack = stack;
  scene.design = design;
  scene.layout = layout;
  scene.feed = feed;
  scene.feed.trace_width = resolved_trace_width(feed, stack);
  scene.feed.port_strip_len = stack.d1;

  const Polygon outline = concave_outline(design);
  std::vector<Vec2> local_patch;
  for (const Vec3& v : outline.vertices) local_patch.push_back({v.x, v.y});

  // Polygon order: patches 0..3, feeds 4..7, probes 8..11.
  for (int e = 0; e < kElements; ++e)
    scene.polygons.push_back(
        place_polygon(local_patch, stack.patch_z(), Label::patch, layout, e));
  for (int e = 0; e < kElements; ++e)
    scene.polygons.push_back(feed_outline(design, scene.feed, stack, layout, e));
  for (int e = 0; e < kElements; ++e)
    scene.polygons.push_back(probe_outline(design, scene.feed, stack, layout, e));

  for (int e = 0; e < kElements; ++e) {
    Port port;
    port.element = e;
    port.feed = kElements + e;
    port.probe = 2 * kElements + e;
    const Polygon& fp = scene.polygons[port.feed];
    const Polygon& pp = scene.polygons[port.probe];
    const Vec3 top_a = pp.vertices[2];
    const Vec3 top_b = pp.vertices[3];
    for (std::size_t i = 0; i < fp.vertices.size(); ++i) {
      const Vec3 u = fp.vertices[i];
      const Vec3 v = fp.vertices[(i + 1) % fp.vertices.size()];
      if ((u == top_a && v == top_b) || (u == top_b && v == top_a)) port.feed_edge = int(i);
    }
    scene.ports.push_back(port);
  }

  const auto violations = validate_scene(scene);
  if (!violations.empty()) {
    std::string msg = "invalid scene:";
    for (const auto& v : violations) msg += " [" + v.kind + "] " + v.message + ";";
    throw GeometryError(msg);
  }
  return scene;
}

std::vector<Violation> validate_scene(const SceneGeometry& scene) {
  std::vector<Violation> out;
  const auto& polys = scene.polygons;
  const double tol = 1e-9;

  for (std::size_t i = 0; i < polys.size(); ++i) {
    const Polygon& p = polys[i];
    const int id = int(i);
    if (p.vertices.size() < 3) {
      out.push_back({"polygon", "polygon " + std::to_string(i) + " has fewer than 3 vertices", {id}});
      continue;
    }
    bool dup = false;
    for (std::size_t k = 0; k < p.vertices.size(); ++k)
      if (p.vertices[k] == p.vertices[(k + 1) % p.vertices.size()]) dup = true;
    if (dup) {
      out.push_back({"polygon", "polygon " + std::to_string(i) + " repeats a vertex", {id}});
      continue;
    }
    if (p.label == Label::probe) {
      double zmin = 1e300, zmax = -1e300;
      for (const Vec3& v : p.vertices) {
        zmin = std::min(zmin, v.z);
        zmax = std::max(zmax, v.z);
      }
      if (std::abs(zmin) > tol || std::abs(zmax - scene.stack.d1) > tol)
        out.push_back({"layer_height",
                       "probe " + std::to_string(i) + " must span z in [0, d1]", {id}});
      continue;
    }
    if (!p.horizontal()) {
      out.push_back({"polygon", "polygon " + std::to_string(i) + " is not horizontal", {id}});
      continue;
    }
    const auto xy = p.outline_xy();
    if (!is_simple(xy))
      out.push_back({"polygon", "polygon " + std::to_string(i) + " self-intersects", {id}});
    else if (signed_area(xy) <= 0.0)
      out.push_back({"polygon", "polygon " + std::to_string(i) + " is not counter-clockwise", {id}});
    const double want = p.label == Label::patch ? scene.stack.patch_z() : scene.stack.feed_z();
    if (std::abs(p.z() - want) > tol)
      out.push_back({"layer_height",
                     std::string(to_string(p.label)) + " " + std::to_string(i) + " at z = " +
                         fmt(p.z()) + " mm, expected " + fmt(want),
                     {id}});
  }

  // Same-layer conflicts between horizontal conductors.
  for (std::size_t i = 0; i < polys.size(); ++i) {
    if (polys[i].label == Label::probe || polys[i].vertices.size() < 3) continue;
    for (std::size_t j = i + 1; j < polys.size(); ++j) {
      if (polys[j].label == Label::probe || polys[j].vertices.size() < 3) continue;
      if (std::abs(polys[i].z() - polys[j].z()) > tol) continue;
      if (polygons_intersect(polys[i].outline_xy(), polys[j].outline_xy()))
        out.push_back({"layer_conflict",
                       std::string(to_string(polys[i].label)) + " " + std::to_string(i) + " and " +
                           to_string(polys[j].label) + " " + std::to_string(j) +
                           " overlap on the same layer",
                       {int(i), int(j)}});
    }
  }

  // Probes must not stand under a patch.
  for (std::size_t i = 0; i < polys.size(); ++i) {
    if (polys[i].label != Label::probe || polys[i].vertices.size() < 3) continue;
    const Vec2 base{0.5 * (polys[i].vertices[0].x + polys[i].vertices[1].x),
                    0.5 * (polys[i].vertices[0].y + polys[i].vertices[1].y)};
    for (std::size_t j = 0; j < polys.size(); ++j) {
      if (polys[j].label != Label::patch) continue;
      if (point_in_polygon(base, polys[j].outline_xy()))
        out.push_back({"layer_conflict",
                       "probe " + std::to_string(i) + " lies under patch " + std::to_string(j),
                       {int(i), int(j)}});
    }
  }

  if (scene.ports.size() != 4)
    out.push_back({"port_count",
                   "scene has " + std::to_string(scene.ports.size()) + " ports, expected 4",
                   {}});
  for (const Port& port : scene.ports) {
    const bool ok = port.probe >= 0 && port.probe < int(polys.size()) && port.feed >= 0 &&
                    port.feed < int(polys.size()) && polys[port.probe].label == Label::probe &&
                    polys[port.feed].label == Label::feed && port.feed_edge >= 0;
    if (!ok) out.push_back({"port", "port references an invalid probe/feed pair", {}});
  }
  return out;
}

std::string scene_to_json(const SceneGeometry& scene) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "carray-scene";
  j["version"] = 1;
  j["units"] = "mm";
  j["stack"] = {{"d1", scene.stack.d1},
                {"d2", scene.stack.d2},
                {"eps_r", scene.stack.eps_r},
                {"mu_r", scene.stack.mu_r}};
  j["design"] = {{"W", scene.design.W},   {"L", scene.design.L},     {"h1", scene.design.h1},
                 {"h2", scene.design.h2}, {"ins", scene.design.ins}};
  j["layout"] = {{"nx", scene.layout.nx},
                 {"ny", scene.layout.ny},
                 {"dx", scene.layout.dx},
                 {"dy", scene.layout.dy}};
  j["feed"] = {{"trace_width", scene.feed.trace_width},
               {"leg1_len", scene.feed.leg1_len},
               {"leg2_len", scene.feed.leg2_len},
               {"port_strip_len", scene.feed.port_strip_len}};
  ordered_json polys = ordered_json::array();
  for (std::size_t i = 0; i < scene.polygons.size(); ++i) {
    const Polygon& p = scene.polygons[i];
    ordered_json verts = ordered_json::array();
    for (const Vec3& v : p.vertices) verts.push_back({v.x, v.y, v.z});
    polys.push_back({{"id", i},
                     {"label", to_string(p.label)},
                     {"element", p.element},
                     {"z", p.z()},
                     {"vertices", verts}});
  }
  j["polygons"] = polys;
  ordered_json ports = ordered_json::array();
  for (std::size_t i = 0; i < scene.ports.size(); ++i) {
    const Port& p = scene.ports[i];
    ports.push_back({{"port", i + 1},
                     {"element", p.element},
                     {"probe", p.probe},
                     {"feed", p.feed},
                     {"feed_edge", p.feed_edge}});
  }
  j["ports"] = ports;
  return j.dump(2) + "\n";
}

}  // namespace carray::geometry
