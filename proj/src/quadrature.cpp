// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/quadrature.hpp"

#include <cmath>
#include <string>

namespace carray::em {

namespace {

const std::array<TrianglePoint, 1> kRule1 = {{{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1.0}}};

const std::array<TrianglePoint, 3> kRule3 = {{
    {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
}};

const std::array<TrianglePoint, 4> kRule4 = {{
    {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, -27.0 / 48.0},
    {{0.6, 0.2, 0.2}, 25.0 / 48.0},
    {{0.2, 0.6, 0.2}, 25.0 / 48.0},
    {{0.2, 0.2, 0.6}, 25.0 / 48.0},
}};

std::array<TrianglePoint, 7> make_rule7() {
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0;
  const double a2 = (6.0 + s15) / 21.0;
  const double w1 = (155.0 - s15) / 1200.0;
  const double w2 = (155.0 + s15) / 1200.0;
  return {{
      {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0},
      {{1.0 - 2.0 * a1, a1, a1}, w1},
      {{a1, 1.0 - 2.0 * a1, a1}, w1},
      {{a1, a1, 1.0 - 2.0 * a1}, w1},
      {{1.0 - 2.0 * a2, a2, a2}, w2},
      {{a2, 1.0 - 2.0 * a2, a2}, w2},
      {{a2, a2, 1.0 - 2.0 * a2}, w2},
  }};
}

const std::array<TrianglePoint, 7> kRule7 = make_rule7();

}  // namespace

bool valid_rule(int points) { return points == 1 || points == 3 || points == 4 || points == 7; }

std::span<const TrianglePoint> triangle_rule(int points) {
  switch (points) {
    case 1: return kRule1;
    case 3: return kRule3;
    case 4: return kRule4;
    case 7: return kRule7;
    default:
      throw SolverError("quadrature order must be one of 1, 3, 4, 7; got " +
                        std::to_string(points));
  }
}

}  // namespace carray::em
