// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/cdt.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "carray/geometry.hpp"

namespace carray::mesh {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

double orient2d(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

// > 0 when d lies strictly inside the circumcircle of CCW triangle (a, b, c).
double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = dot(ab, ab);
  const double ac2 = dot(ac, ac);
  return {a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
}

struct Tri {
  std::array<int, 3> v;
  bool alive = true;
  bool skip = false;  // refinement gave up on this triangle
};

struct Segment {
  int a;
  int b;
  bool locked;
};

class Refiner {
 public:
  Refiner(std::span<const Vec2> outline, const PlanarMeshOptions& opt)
      : outline_(outline.begin(), outline.end()), opt_(opt) {
    const std::size_t n = outline_.size();
    scale_ = 0.0;
    for (const Vec2& p : outline_) scale_ = std::max({scale_, std::abs(p.x), std::abs(p.y)});
    for (std::size_t i = 0; i < n; ++i)
      scale_ = std::max(scale_, norm(outline_[(i + 1) % n] - outline_[i]));

    // Interior angle at each input vertex, used for the small-angle exemption.
    corner_angle_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 prev = outline_[(i + n - 1) % n];
      const Vec2 cur = outline_[i];
      const Vec2 next = outline_[(i + 1) % n];
      const double a = std::atan2(cross(next - cur, prev - cur), dot(next - cur, prev - cur));
      corner_angle_[i] = a < 0 ? a + 2.0 * constants::pi : a;
    }
  }

  PlanarMesh run() {
    const std::size_t n = outline_.size();
    pts_ = outline_;

    // Super triangle well outside the domain.
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& p : outline_) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const Vec2 mid = 0.5 * (lo + hi);
    const double span = std::max(hi.x - lo.x, hi.y - lo.y) + 1.0;
    super_ = int(pts_.size());
    pts_.push_back({mid.x - 40.0 * span, mid.y - 30.0 * span});
    pts_.push_back({mid.x + 40.0 * span, mid.y - 30.0 * span});
    pts_.push_back({mid.x, mid.y + 40.0 * span});
    add_triangle({super_, super_ + 1, super_ + 2});

    for (std::size_t i = 0; i < n; ++i) insert(int(i));

    // Boundary subsegments: uniform split to the size bound unless locked.
    for (std::size_t i = 0; i < n; ++i) {
      const int a = int(i);
      const int b = int((i + 1) % n);
      const bool locked = i < opt_.locked_edges.size() && opt_.locked_edges[i];
      const double len = norm(outline_[b] - outline_[a]);
      const int pieces = locked ? 1 : std::max(1, int(std::ceil(len / opt_.max_edge - 1e-9)));
      int prev = a;
      for (int k = 1; k < pieces; ++k) {
        const double t = double(k) / pieces;
        const Vec2 p = outline_[a] + t * (outline_[b] - outline_[a]);
        const int id = add_point(p);
        insert(id);
        segs_.push_back({prev, id, false});
        prev = id;
      }
      segs_.push_back({prev, b, locked});
    }

    refine();

    PlanarMesh out;
    std::unordered_map<int, int> remap;
    for (int i = 0; i < int(n); ++i) remap[i] = i;
    out.points.assign(outline_.begin(), outline_.end());
    auto map_point = [&](int v) {
      auto it = remap.find(v);
      if (it != remap.end()) return it->second;
      const int id = int(out.points.size());
      out.points.push_back(pts_[v]);
      remap[v] = id;
      return id;
    };
    // Number surviving points in insertion order.
    std::vector<char> used(pts_.size(), 0);
    for (const Tri& t : tris_)
      if (t.alive && inside(t))
        for (int v : t.v) used[v] = 1;
    for (int v = int(n); v < int(pts_.size()); ++v)
      if (used[v]) map_point(v);
    for (const Tri& t : tris_) {
      if (!t.alive || !inside(t)) continue;
      out.triangles.push_back({remap.at(t.v[0]), remap.at(t.v[1]), remap.at(t.v[2])});
    }
    for (const Segment& s : segs_) out.boundary.push_back({remap.at(s.a), remap.at(s.b)});

    // Every boundary subsegment must be a triangle edge of the result.
    std::unordered_map<std::uint64_t, int> edges;
    for (const auto& t : out.triangles)
      for (int k = 0; k < 3; ++k) edges[edge_key(t[k], t[(k + 1) % 3])]++;
    for (const auto& s : out.boundary)
      if (!edges.count(edge_key(s[0], s[1])))
        throw MeshError("triangulation lost a boundary segment");
    return out;
  }

 private:
  int add_point(Vec2 p) {
    if (pts_.size() >= opt_.max_points + 3)
      throw MeshError("refinement exceeded " + std::to_string(opt_.max_points) + " points");
    pts_.push_back(p);
    return int(pts_.size()) - 1;
  }

  void add_triangle(std::array<int, 3> v) {
    const int id = int(tris_.size());
    tris_.push_back({v, true, false});
    for (int k = 0; k < 3; ++k) edge_owner_[edge_key(v[k], v[(k + 1) % 3])] = id;
  }

  void kill_triangle(int id) {
    Tri& t = tris_[id];
    t.alive = false;
    for (int k = 0; k < 3; ++k) {
      auto it = edge_owner_.find(edge_key(t.v[k], t.v[(k + 1) % 3]));
      if (it != edge_owner_.end() && it->second == id) edge_owner_.erase(it);
    }
  }

  int neighbor(int a, int b) const {
    auto it = edge_owner_.find(edge_key(b, a));
    return it == edge_owner_.end() ? -1 : it->second;
  }

  bool is_super(int v) const { return v >= super_ && v < super_ + 3; }

  bool inside(const Tri& t) const {
    if (is_super(t.v[0]) || is_super(t.v[1]) || is_super(t.v[2])) return false;
    const Vec2 c = (1.0 / 3.0) * (pts_[t.v[0]] + pts_[t.v[1]] + pts_[t.v[2]]);
    return geometry::point_in_polygon(c, outline_);
  }

  // Bowyer-Watson insertion of an existing point index.
  void insert(int pid) {
    const Vec2 p = pts_[pid];
    // Points on an edge can test marginally outside both neighbours, so take
    // the triangle with the least negative orientation.
    int start = -1;
    double best = -1e300;
    for (int i = 0; i < int(tris_.size()); ++i) {
      const Tri& t = tris_[i];
      if (!t.alive) continue;
      const Vec2 a = pts_[t.v[0]], b = pts_[t.v[1]], c = pts_[t.v[2]];
      const double o = std::min({orient2d(a, b, p) / norm(b - a), orient2d(b, c, p) / norm(c - b),
                                 orient2d(c, a, p) / norm(a - c)});
      if (o > best) {
        best = o;
        start = i;
      }
      if (o >= 0.0) break;
    }
    if (start < 0 || best < -1e-9 * scale_)
      throw MeshError("point location failed during triangulation");

    std::vector<char> in_cavity(tris_.size(), 0);
    std::vector<int> cavity{start};
    in_cavity[start] = 1;
    for (std::size_t q = 0; q < cavity.size(); ++q) {
      const Tri& t = tris_[cavity[q]];
      for (int k = 0; k < 3; ++k) {
        const int nb = neighbor(t.v[k], t.v[(k + 1) % 3]);
        if (nb < 0 || in_cavity[nb]) continue;
        const Tri& u = tris_[nb];
        if (incircle(pts_[u.v[0]], pts_[u.v[1]], pts_[u.v[2]], p) > tiny_incircle(u)) {
          in_cavity[nb] = 1;
          cavity.push_back(nb);
        }
      }
    }

    // Grow the cavity until it is star-shaped from p.
    std::vector<std::array<int, 2>> rim;
    for (bool grown = true; grown;) {
      grown = false;
      rim.clear();
      for (int id : cavity) {
        const Tri& t = tris_[id];
        for (int k = 0; k < 3; ++k) {
          const int a = t.v[k], b = t.v[(k + 1) % 3];
          const int nb = neighbor(a, b);
          if (nb >= 0 && in_cavity[nb]) continue;
          if (orient2d(pts_[a], pts_[b], p) <= 0.0 && nb >= 0) {
            in_cavity[nb] = 1;
            cavity.push_back(nb);
            grown = true;
            break;
          }
          rim.push_back({a, b});
        }
        if (grown) break;
      }
    }
    for (int id : cavity) kill_triangle(id);
    for (const auto& e : rim) add_triangle({e[0], e[1], pid});
  }

  double tiny_incircle(const Tri& t) const {
    const double s = scale_;
    (void)t;
    return 1e-14 * s * s * s * s;
  }

  bool encroaches(const Segment& s, Vec2 p) const {
    const Vec2 a = pts_[s.a], b = pts_[s.b];
    const double len2 = dot(b - a, b - a);
    return dot(a - p, b - p) < 1e-12 * len2;
  }

  int find_encroached() const {
    for (int i = 0; i < int(segs_.size()); ++i) {
      const Segment& s = segs_[i];
      if (s.locked) continue;
      const int left = neighbor(s.b, s.a);   // triangle owning (a, b)
      const int right = neighbor(s.a, s.b);  // triangle owning (b, a)
      if (left < 0 && right < 0) return i;   // segment missing from the triangulation
      // For a Delaunay edge, any encroaching vertex implies an encroaching apex.
      for (int id : {left, right}) {
        if (id < 0) continue;
        const Tri& t = tris_[id];
        for (int v : t.v) {
          if (v == s.a || v == s.b || is_super(v)) continue;
          if (encroaches(s, pts_[v])) return i;
        }
      }
    }
    return -1;
  }

  void split_segment(int index) {
    const Segment s = segs_[index];
    const Vec2 m = 0.5 * (pts_[s.a] + pts_[s.b]);
    const int id = add_point(m);
    insert(id);
    segs_[index] = {s.a, id, false};
    segs_.push_back({id, s.b, false});
  }

  bool angle_exempt(const Tri& t) const {
    // The smallest angle sits at an input corner that is itself sharp.
    const Vec2 p[3] = {pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]]};
    int at = 0;
    double best = 1e300;
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = p[(k + 1) % 3] - p[k];
      const Vec2 w = p[(k + 2) % 3] - p[k];
      const double ang = std::atan2(std::abs(cross(u, w)), dot(u, w));
      if (ang < best) {
        best = ang;
        at = k;
      }
    }
    const int v = t.v[at];
    return v < int(outline_.size()) && corner_angle_[v] < constants::pi / 3.0 + 1e-9;
  }

  void refine() {
    const double min_angle = opt_.min_angle_deg;
    const double max_edge = opt_.max_edge * (1.0 + 1e-9);
    for (;;) {
      const int enc = find_encroached();
      if (enc >= 0) {
        split_segment(enc);
        continue;
      }
      // Largest bad triangle first.
      int worst = -1;
      double worst_r = 0.0;
      for (int i = 0; i < int(tris_.size()); ++i) {
        const Tri& t = tris_[i];
        if (!t.alive || t.skip || !inside(t)) continue;
        const Vec2 a = pts_[t.v[0]], b = pts_[t.v[1]], c = pts_[t.v[2]];
        const double lmax = std::max({norm(b - a), norm(c - b), norm(a - c)});
        bool bad = lmax > max_edge;
        if (!bad && triangle_min_angle_deg(a, b, c) < min_angle && !angle_exempt(t)) bad = true;
        if (!bad) continue;
        const double r = norm(circumcenter(a, b, c) - a);
        if (r > worst_r) {
          worst_r = r;
          worst = i;
        }
      }
      if (worst < 0) return;

      Tri& t = tris_[worst];
      const Vec2 cc = circumcenter(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]]);
      std::vector<int> hit;
      bool locked_hit = false;
      for (int i = 0; i < int(segs_.size()); ++i) {
        if (!encroaches(segs_[i], cc)) continue;
        if (segs_[i].locked)
          locked_hit = true;
        else
          hit.push_back(i);
      }
      if (!hit.empty()) {
        // Splitting shifts indices only by appending, so ascending order is safe.
        for (int i : hit) split_segment(i);
        continue;
      }
      if (locked_hit || !geometry::point_in_polygon(cc, outline_)) {
        t.skip = true;
        continue;
      }
      insert(add_point(cc));
    }
  }

  std::vector<Vec2> outline_;
  PlanarMeshOptions opt_;
  std::vector<double> corner_angle_;
  double scale_ = 1.0;
  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::vector<Segment> segs_;
  std::unordered_map<std::uint64_t, int> edge_owner_;
  int super_ = 0;
};

}  // namespace

double triangle_min_angle_deg(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 p[3] = {a, b, c};
  double best = 180.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 u = p[(k + 1) % 3] - p[k];
    const Vec2 w = p[(k + 2) % 3] - p[k];
    best = std::min(best, std::atan2(std::abs(cross(u, w)), dot(u, w)) * 180.0 / constants::pi);
  }
  return best;
}

PlanarMesh triangulate_polygon(std::span<const Vec2> outline, const PlanarMeshOptions& options) {
  if (outline.size() < 3) throw MeshError("polygon needs at least 3 vertices");
  if (!(options.max_edge > 0.0)) throw MeshError("max_edge must be > 0");
  if (geometry::signed_area(outline) <= 0.0 || !geometry::is_simple(outline))
    throw MeshError("polygon must be simple and counter-clockwise");
  Refiner r(outline, options);
  return r.run();
}

}  // namespace carray::mesh
