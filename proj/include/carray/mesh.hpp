// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_MESH_HPP
#define CARRAY_MESH_HPP

#include <array>
#include <string>
#include <vector>

#include "carray/common.hpp"
#include "carray/geometry.hpp"

namespace carray::mesh {

// Triangulated conductors in metres. Scenes are meshed element-major: the
// vertices and triangles of element e are the element-0 ones reflected by the
// mirror bits of e, so entity k of element e is entity k of element 0 mirrored.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> triangle_polygon;  // provenance: index into scene.polygons
  // Ground-contact edge (vertex pair at z = 0) of each port's probe.
  std::vector<std::array<int, 2>> port_edges;
  // Mirror-block structure; elements == 1 means no structure is assumed.
  int elements = 1;
  int vertices_per_element = 0;
  int triangles_per_element = 0;

  double triangle_area(int t) const;
  Vec3 centroid(int t) const;
};

struct MeshStats {
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  double min_angle_deg = 0.0;
  double max_edge_mm = 0.0;
  double total_area_mm2 = 0.0;
};

// One RWG function per interior edge. Edges on the ground plane (z = 0) that
// bound a single triangle carry a half basis whose other half is its image.
struct BasisFunction {
  std::array<int, 2> vertices{};  // sorted
  int plus = -1;                  // -1 for ground-contact half bases
  int minus = -1;
  double length = 0.0;            // metres
};

struct RwgBasis {
  std::vector<BasisFunction> functions;
  std::vector<int> port_basis;  // port index -> basis index of its delta-gap edge
  int elements = 1;             // mirror-block structure (see TriMesh)
  int per_element = 0;

  std::size_t size() const { return functions.size(); }
};

// max_edge_len in millimetres. Probe strips are meshed with a single segment
// across their width, so a port always resolves to one basis function.
TriMesh triangulate(const geometry::SceneGeometry& scene, double max_edge_len);

// Mesh a single horizontal polygon (z is carried through); used directly by
// tests and by the scene mesher.
TriMesh triangulate_single(const geometry::Polygon& polygon, double max_edge_len);

RwgBasis build_rwg(const TriMesh& mesh);

MeshStats mesh_stats(const TriMesh& mesh);

// Plain-text dump: vertices, triangles, basis edges, ports.
std::string dump_mesh(const TriMesh& mesh, const RwgBasis& basis);

}  // namespace carray::mesh

#endif  // CARRAY_MESH_HPP
