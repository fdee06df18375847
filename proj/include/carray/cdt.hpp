// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_CDT_HPP
#define CARRAY_CDT_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "carray/common.hpp"

namespace carray::mesh {

struct PlanarMeshOptions {
  double max_edge = 1.0;
  double min_angle_deg = 20.0;
  // One flag per outline edge (edge i runs from vertex i to vertex i+1).
  // Locked edges are never subdivided; they carry inter-polygon junctions.
  std::vector<char> locked_edges;
  std::size_t max_points = 100000;
};

// The first outline.size() points are the outline vertices, bit-for-bit.
struct PlanarMesh {
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<std::array<int, 2>> boundary;   // boundary subsegments
};

// Conforming Delaunay triangulation of a simple CCW polygon, refined until
// every triangle has all edges <= max_edge and minimum angle >= min_angle_deg.
// Triangles touching a locked edge may keep longer edges when refining them
// would require splitting the lock; triangles at input corners sharper than
// 60 degrees are exempt from the angle bound.
PlanarMesh triangulate_polygon(std::span<const Vec2> outline, const PlanarMeshOptions& options);

double triangle_min_angle_deg(Vec2 a, Vec2 b, Vec2 c);

}  // namespace carray::mesh

#endif  // CARRAY_CDT_HPP
