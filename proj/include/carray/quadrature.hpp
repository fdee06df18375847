// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_QUADRATURE_HPP
#define CARRAY_QUADRATURE_HPP

#include <array>
#include <span>

#include "carray/common.hpp"

namespace carray::em {

struct TrianglePoint {
  std::array<double, 3> bary;
  double weight;  // weights sum to 1; multiply by the triangle area
};

// Symmetric point sets with 1, 3, 4 (Strang-Fix) or 7 (Radon) points. Each
// set is invariant under vertex permutation, so mirrored triangles sample
// mirrored points.
std::span<const TrianglePoint> triangle_rule(int points);

bool valid_rule(int points);

inline Vec3 barycentric(const std::array<Vec3, 3>& v, const std::array<double, 3>& b) {
  return b[0] * v[0] + b[1] * v[1] + b[2] * v[2];
}

}  // namespace carray::em

#endif  // CARRAY_QUADRATURE_HPP
