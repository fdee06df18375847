// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_POTENTIAL_HPP
#define CARRAY_POTENTIAL_HPP

#include <array>

#include "carray/common.hpp"

namespace carray::em {

// Closed-form integrals over a flat triangle, R = |r - r'|:
//   scalar  = integral of 1/R dS'     vector  = integral of (r' - r)/R dS'
//   scalar1 = integral of R dS'       vector1 = integral of (r' - r) R dS'
// Valid for observation points anywhere, including on the triangle.
struct StaticPotential {
  double scalar = 0.0;
  Vec3 vector;
  double scalar1 = 0.0;
  Vec3 vector1;
};

StaticPotential static_potential(const std::array<Vec3, 3>& tri, Vec3 r);

}  // namespace carray::em

#endif  // CARRAY_POTENTIAL_HPP
