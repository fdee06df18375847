// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/potential.hpp"

#include <algorithm>
#include <cmath>

namespace carray::em {

namespace {

// log(R + s) without cancellation for s < 0, using R + s = R0^2 / (R - s).
double log_r_plus_s(double r, double s, double r0sq) {
  if (s >= 0.0) return std::log(r + s);
  return std::log(r0sq / (r - s));
}

}  // namespace

StaticPotential static_potential(const std::array<Vec3, 3>& tri, Vec3 r) {
  const Vec3 e1 = tri[1] - tri[0];
  const Vec3 e2 = tri[2] - tri[0];
  const Vec3 nn = cross(e1, e2);
  const double twice_area = norm(nn);
  const Vec3 n = (1.0 / twice_area) * nn;
  const double scale = std::max({norm(e1), norm(e2), norm(tri[2] - tri[1])});
  const double tiny = 1e-12 * scale;

  const double w0 = dot(n, r - tri[0]);
  const double aw0 = std::abs(w0) < tiny ? 0.0 : std::abs(w0);
  const Vec3 rho = r - w0 * n;

  StaticPotential out;
  Vec3 inplane;
  Vec3 inplane1;
  double edge_r1 = 0.0;  // sum over edges of t0 * (line integral of R)
  for (int i = 0; i < 3; ++i) {
    const Vec3 pm = tri[i];
    const Vec3 pp = tri[(i + 1) % 3];
    const Vec3 edge = pp - pm;
    const Vec3 l = (1.0 / norm(edge)) * edge;
    const Vec3 u = cross(l, n);
    const double sm = dot(pm - rho, l);
    const double sp = dot(pp - rho, l);
    const double t0 = dot(pm - rho, u);
    const double r0sq = t0 * t0 + w0 * w0;
    const double rm = std::sqrt(sm * sm + r0sq);
    const double rp = std::sqrt(sp * sp + r0sq);

    double f2 = 0.0;
    if (r0sq > tiny * tiny) f2 = log_r_plus_s(rp, sp, r0sq) - log_r_plus_s(rm, sm, r0sq);

    out.scalar += t0 * f2;
    if (aw0 > 0.0 && std::abs(t0) > 0.0) {
      out.scalar -= aw0 * (std::atan(t0 * sp / (r0sq + aw0 * rp)) -
                           std::atan(t0 * sm / (r0sq + aw0 * rm)));
    }
    // Line integrals of R and R^3 along the edge.
    const double l1 = 0.5 * (sp * rp - sm * rm + r0sq * f2);
    const double l3 = 0.25 * (sp * rp * rp * rp - sm * rm * rm * rm + 3.0 * r0sq * l1);
    inplane += l1 * u;
    inplane1 += (l3 / 3.0) * u;
    edge_r1 += t0 * l1;
  }
  out.vector = inplane - (w0 * out.scalar) * n;
  out.scalar1 = (w0 * w0 * out.scalar + edge_r1) / 3.0;
  out.vector1 = inplane1 - (w0 * out.scalar1) * n;
  return out;
}

}  // namespace carray::em
