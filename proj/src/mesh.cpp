// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "carray/cdt.hpp"

namespace carray::mesh {

namespace {

using geometry::Label;
using geometry::Polygon;
using geometry::SceneGeometry;

constexpr double kMm = 1e-3;

// Mesh of one element in millimetres, vertices merged across polygons.
struct ElementMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> polygon;
  std::array<int, 2> port_edge{-1, -1};
  std::map<std::tuple<double, double, double>, int> index;

  int vertex(Vec3 p) {
    const auto key = std::make_tuple(p.x, p.y, p.z);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    vertices.push_back(p);
    const int id = int(vertices.size()) - 1;
    index.emplace(key, id);
    return id;
  }
};

void append_horizontal(ElementMesh& em, const Polygon& poly, int poly_id, double max_edge,
                       int locked_edge) {
  const auto xy = poly.outline_xy();
  PlanarMeshOptions opt;
  opt.max_edge = max_edge;
  opt.locked_edges.assign(xy.size(), 0);
  if (locked_edge >= 0) opt.locked_edges[locked_edge] = 1;
  PlanarMesh pm;
  try {
    pm = triangulate_polygon(xy, opt);
  } catch (const MeshError& e) {
    throw MeshError("polygon " + std::to_string(poly_id) + " is unmeshable: " + e.what());
  }
  std::vector<int> ids(pm.points.size());
  for (std::size_t i = 0; i < pm.points.size(); ++i) {
    const Vec3 p = i < poly.vertices.size() ? poly.vertices[i]
                                            : Vec3{pm.points[i].x, pm.points[i].y, poly.z()};
    ids[i] = em.vertex(p);
  }
  for (const auto& t : pm.triangles) {
    em.triangles.push_back({ids[t[0]], ids[t[1]], ids[t[2]]});
    em.polygon.push_back(poly_id);
  }
}

// Vertical probe, meshed in its own (along-base, height) frame. The base and
// top stay single edges: the base is the port, the top joins the feed.
void append_probe(ElementMesh& em, const Polygon& poly, int poly_id, double max_edge) {
  if (poly.vertices.size() != 4) throw MeshError("probe polygon must be a rectangle");
  const Vec3 o = poly.vertices[0];
  const Vec3 along = poly.vertices[1] - o;
  const double width = norm(along);
  const double height = poly.vertices[3].z - o.z;
  if (!(width > 0.0) || !(height > 0.0))
    throw MeshError("probe polygon " + std::to_string(poly_id) + " is degenerate");
  const Vec3 u = (1.0 / width) * along;
  // One column of quads split along a diagonal; rows keep the height edges
  // within max_edge.
  const int rows = std::max(1, int(std::ceil(height / max_edge - 1e-9)));
  PlanarMesh pm;
  pm.points = {{0.0, 0.0}, {width, 0.0}, {width, height}, {0.0, height}};
  std::vector<int> left{0}, right{1};
  for (int r = 1; r < rows; ++r) {
    const double z = height * r / rows;
    pm.points.push_back({0.0, z});
    left.push_back(int(pm.points.size()) - 1);
    pm.points.push_back({width, z});
    right.push_back(int(pm.points.size()) - 1);
  }
  left.push_back(3);
  right.push_back(2);
  for (int r = 0; r < rows; ++r) {
    pm.triangles.push_back({left[r], right[r], right[r + 1]});
    pm.triangles.push_back({left[r], right[r + 1], left[r + 1]});
  }
  std::vector<int> ids(pm.points.size());
  for (std::size_t i = 0; i < pm.points.size(); ++i) {
    const Vec3 p = i < 4 ? poly.vertices[i]
                         : o + pm.points[i].x * u + Vec3{0.0, 0.0, pm.points[i].y};
    ids[i] = em.vertex(p);
  }
  for (const auto& t : pm.triangles) {
    em.triangles.push_back({ids[t[0]], ids[t[1]], ids[t[2]]});
    em.polygon.push_back(poly_id);
  }
  em.port_edge = {ids[0], ids[1]};
}

ElementMesh mesh_element(const SceneGeometry& scene, int element, double max_edge) {
  ElementMesh em;
  const geometry::Port* port = nullptr;
  for (const auto& p : scene.ports)
    if (p.element == element) port = &p;
  if (port == nullptr) throw MeshError("element " + std::to_string(element) + " has no port");
  for (std::size_t i = 0; i < scene.polygons.size(); ++i) {
    const Polygon& poly = scene.polygons[i];
    if (poly.element != element) continue;
    switch (poly.label) {
      case Label::patch: append_horizontal(em, poly, int(i), max_edge, -1); break;
      case Label::feed:
        append_horizontal(em, poly, int(i), max_edge, int(i) == port->feed ? port->feed_edge : -1);
        break;
      case Label::probe: append_probe(em, poly, int(i), max_edge); break;
    }
  }
  return em;
}

bool same_vertex_set(const Polygon& a, const Polygon& b) {
  if (a.vertices.size() != b.vertices.size()) return false;
  std::multiset<std::tuple<double, double, double>> sa, sb;
  for (const Vec3& v : a.vertices) sa.insert({v.x, v.y, v.z});
  for (const Vec3& v : b.vertices) sb.insert({v.x, v.y, v.z});
  return sa == sb;
}

// True when every polygon of element e is the exact reflection of the
// corresponding element-0 polygon.
bool mirror_symmetric(const SceneGeometry& scene) {
  if (scene.ports.size() != 4) return false;
  for (const Polygon& p : scene.polygons) {
    if (p.element < 0 || p.element > 3) return false;
    if (p.element == 0) continue;
    bool found = false;
    for (const Polygon& q : scene.polygons) {
      if (q.element != 0 || q.label != p.label) continue;
      if (same_vertex_set(geometry::mirror_polygon(q, p.element), p)) found = true;
    }
    if (!found) return false;
  }
  for (const auto& port : scene.ports) {
    const auto& p0 = scene.ports[0];
    const auto& fp = scene.polygons[port.feed];
    const auto& f0 = scene.polygons[p0.feed];
    if (fp.label != Label::feed || f0.label != Label::feed) return false;
  }
  return true;
}

int polygon_of(const SceneGeometry& scene, Label label, int element) {
  for (std::size_t i = 0; i < scene.polygons.size(); ++i)
    if (scene.polygons[i].label == label && scene.polygons[i].element == element) return int(i);
  return -1;
}

}  // namespace

double TriMesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  return 0.5 * norm(cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]));
}

Vec3 TriMesh::centroid(int t) const {
  const auto& tri = triangles[t];
  return (1.0 / 3.0) * (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]);
}

TriMesh triangulate(const SceneGeometry& scene, double max_edge_len) {
  if (!(max_edge_len > 0.0)) throw MeshError("max_edge_len must be > 0 mm");
  TriMesh out;
  const bool symmetric = mirror_symmetric(scene);

  std::vector<ElementMesh> meshes;
  if (symmetric) {
    meshes.push_back(mesh_element(scene, 0, max_edge_len));
  } else {
    for (int e = 0; e < geometry::kElements; ++e)
      meshes.push_back(mesh_element(scene, e, max_edge_len));
  }

  out.port_edges.resize(scene.ports.size());
  for (int e = 0; e < geometry::kElements; ++e) {
    const ElementMesh& em = symmetric ? meshes[0] : meshes[e];
    const int bits = symmetric ? e : 0;
    const int v0 = int(out.vertices.size());
    for (const Vec3& v : em.vertices)
      out.vertices.push_back(geometry::mirror_point(kMm * v, bits));
    for (std::size_t t = 0; t < em.triangles.size(); ++t) {
      const auto& tri = em.triangles[t];
      out.triangles.push_back({tri[0] + v0, tri[1] + v0, tri[2] + v0});
      const int src = em.polygon[t];
      out.triangle_polygon.push_back(
          symmetric ? polygon_of(scene, scene.polygons[src].label, e) : src);
    }
    for (std::size_t p = 0; p < scene.ports.size(); ++p)
      if (scene.ports[p].element == e)
        out.port_edges[p] = {em.port_edge[0] + v0, em.port_edge[1] + v0};
  }
  if (symmetric) {
    out.elements = geometry::kElements;
    out.vertices_per_element = int(meshes[0].vertices.size());
    out.triangles_per_element = int(meshes[0].triangles.size());
  }

  for (std::size_t t = 0; t < out.triangles.size(); ++t)
    if (!(out.triangle_area(int(t)) > 1e-18))
      throw MeshError("degenerate triangle in polygon " +
                      std::to_string(out.triangle_polygon[t]));
  return out;
}

TriMesh triangulate_single(const geometry::Polygon& polygon, double max_edge_len) {
  if (!polygon.horizontal()) throw MeshError("triangulate_single expects a horizontal polygon");
  ElementMesh em;
  append_horizontal(em, polygon, 0, max_edge_len, -1);
  TriMesh out;
  for (const Vec3& v : em.vertices) out.vertices.push_back(kMm * v);
  out.triangles = em.triangles;
  out.triangle_polygon = em.polygon;
  return out;
}

RwgBasis build_rwg(const TriMesh& mesh) {
  std::map<std::pair<int, int>, std::vector<int>> edges;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      edges[{std::min(a, b), std::max(a, b)}].push_back(int(t));
    }
  }
  RwgBasis out;
  for (const auto& [key, tris] : edges) {
    if (tris.size() > 2)
      throw MeshError("non-manifold edge (" + std::to_string(key.first) + ", " +
                      std::to_string(key.second) + ") shared by " + std::to_string(tris.size()) +
                      " triangles");
    BasisFunction f;
    f.vertices = {key.first, key.second};
    f.length = norm(mesh.vertices[key.second] - mesh.vertices[key.first]);
    if (tris.size() == 2) {
      f.plus = std::min(tris[0], tris[1]);
      f.minus = std::max(tris[0], tris[1]);
    } else if (mesh.vertices[key.first].z == 0.0 && mesh.vertices[key.second].z == 0.0 &&
               std::any_of(mesh.triangles[tris[0]].begin(), mesh.triangles[tris[0]].end(),
                           [&](int v) { return mesh.vertices[v].z != 0.0; })) {
      // Vertical strip standing on the ground plane.
      f.minus = tris[0];
    } else {
      continue;  // free boundary edge
    }
    out.functions.push_back(f);
  }
  // std::map iteration already yields (min vertex, max vertex) order.

  for (const auto& pe : mesh.port_edges) {
    const std::array<int, 2> key{std::min(pe[0], pe[1]), std::max(pe[0], pe[1])};
    int found = -1;
    for (std::size_t i = 0; i < out.functions.size(); ++i)
      if (out.functions[i].vertices == key) found = int(i);
    if (found < 0)
      throw MeshError("port edge (" + std::to_string(pe[0]) + ", " + std::to_string(pe[1]) +
                      ") not found among basis edges");
    out.port_basis.push_back(found);
  }

  if (mesh.elements > 1 && out.functions.size() % mesh.elements == 0) {
    const int per = int(out.functions.size()) / mesh.elements;
    bool ok = true;
    for (int e = 1; e < mesh.elements && ok; ++e) {
      const int dv = e * mesh.vertices_per_element;
      const int dt = e * mesh.triangles_per_element;
      for (int k = 0; k < per && ok; ++k) {
        const auto& f0 = out.functions[k];
        const auto& fe = out.functions[e * per + k];
        ok = fe.vertices[0] == f0.vertices[0] + dv && fe.vertices[1] == f0.vertices[1] + dv &&
             fe.minus == f0.minus + dt && (f0.plus < 0 ? fe.plus < 0 : fe.plus == f0.plus + dt);
      }
    }
    if (ok) {
      out.elements = mesh.elements;
      out.per_element = per;
    }
  }
  return out;
}

MeshStats mesh_stats(const TriMesh& mesh) {
  MeshStats s;
  s.vertices = mesh.vertices.size();
  s.triangles = mesh.triangles.size();
  s.min_angle_deg = 180.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3 p[3] = {mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
    for (int k = 0; k < 3; ++k) {
      const Vec3 u = p[(k + 1) % 3] - p[k];
      const Vec3 w = p[(k + 2) % 3] - p[k];
      const double ang = std::atan2(norm(cross(u, w)), dot(u, w)) * 180.0 / constants::pi;
      s.min_angle_deg = std::min(s.min_angle_deg, ang);
      s.max_edge_mm = std::max(s.max_edge_mm, norm(u) / kMm);
    }
    s.total_area_mm2 += mesh.triangle_area(int(t)) / (kMm * kMm);
  }
  return s;
}

std::string dump_mesh(const TriMesh& mesh, const RwgBasis& basis) {
  std::ostringstream os;
  char buf[160];
  os << "carray-mesh 1\n";
  os << "vertices " << mesh.vertices.size() << "\n";
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x, v.y, v.z);
    os << buf;
  }
  os << "triangles " << mesh.triangles.size() << "\n";
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    os << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << mesh.triangle_polygon[t] << "\n";
  }
  os << "basis " << basis.functions.size() << "\n";
  for (const auto& f : basis.functions) {
    std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g\n", f.vertices[0], f.vertices[1], f.plus,
                  f.minus, f.length);
    os << buf;
  }
  os << "ports " << basis.port_basis.size() << "\n";
  for (std::size_t p = 0; p < basis.port_basis.size(); ++p)
    os << p + 1 << ' ' << basis.port_basis[p] << "\n";
  return os.str();
}

}  // namespace carray::mesh
