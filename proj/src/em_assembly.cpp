// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>

#include "carray/em.hpp"
#include "carray/potential.hpp"
#include "carray/quadrature.hpp"

namespace carray::em {

namespace {

using mesh::RwgBasis;
using mesh::TriMesh;

constexpr double kInv4Pi = 1.0 / (4.0 * constants::pi);

struct QuadPoint {
  Vec3 r;
  Vec3 rel;  // r - centroid
  double w;  // weight * area
};

struct TriData {
  std::array<Vec3, 3> v;
  Vec3 c;
  double area = 0.0;
  double size = 0.0;
  std::vector<QuadPoint> q;      // configured rule
  std::vector<QuadPoint> q7;     // outer rule for near pairs
  std::vector<QuadPoint> q112;   // outer rule for touching pairs: 16 children x 7
  std::vector<QuadPoint> q3;     // inner rule when extraction is off
};

Vec3 reflect_z(Vec3 p) { return {p.x, p.y, -p.z}; }

std::vector<QuadPoint> make_points(const TriData& t, int order) {
  std::vector<QuadPoint> out;
  for (const TrianglePoint& tp : triangle_rule(order)) {
    const Vec3 r = barycentric(t.v, tp.bary);
    out.push_back({r, r - t.c, tp.weight * t.area});
  }
  return out;
}

std::vector<QuadPoint> make_subdivided(const TriData& t, int levels) {
  std::vector<std::array<Vec3, 3>> tris{t.v};
  for (int it = 0; it < levels; ++it) {
    std::vector<std::array<Vec3, 3>> next;
    next.reserve(4 * tris.size());
    for (const auto& a : tris) {
      const Vec3 m01 = 0.5 * (a[0] + a[1]), m12 = 0.5 * (a[1] + a[2]), m20 = 0.5 * (a[2] + a[0]);
      next.push_back({a[0], m01, m20});
      next.push_back({m01, a[1], m12});
      next.push_back({m20, m12, a[2]});
      next.push_back({m01, m12, m20});
    }
    tris = std::move(next);
  }
  const double child_area = t.area / double(tris.size());
  std::vector<QuadPoint> out;
  for (const auto& a : tris)
    for (const TrianglePoint& tp : triangle_rule(7)) {
      const Vec3 r = barycentric(a, tp.bary);
      out.push_back({r, r - t.c, tp.weight * child_area});
    }
  return out;
}

TriData make_tri(const std::array<Vec3, 3>& v, int order) {
  TriData t;
  t.v = v;
  t.c = (1.0 / 3.0) * (v[0] + v[1] + v[2]);
  t.area = 0.5 * norm(cross(v[1] - v[0], v[2] - v[0]));
  t.size = std::max({norm(v[1] - v[0]), norm(v[2] - v[1]), norm(v[0] - v[2])});
  t.q = make_points(t, order);
  t.q7 = make_points(t, 7);
  t.q112 = make_subdivided(t, 2);
  t.q3 = make_points(t, 3);
  return t;
}

// Edge k of a triangle is the one opposite vertex k.
struct LocalBasis {
  int index = -1;
  double coef = 0.0;  // +-length
};

struct Prepared {
  std::vector<TriData> tri;
  std::vector<TriData> image;
  std::vector<std::array<LocalBasis, 3>> local;
};

Prepared prepare(const TriMesh& mesh, const RwgBasis& basis, int order) {
  Prepared p;
  const std::size_t nt = mesh.triangles.size();
  p.tri.reserve(nt);
  p.image.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& ids = mesh.triangles[t];
    const std::array<Vec3, 3> v{mesh.vertices[ids[0]], mesh.vertices[ids[1]],
                                mesh.vertices[ids[2]]};
    p.tri.push_back(make_tri(v, order));
    p.image.push_back(make_tri({reflect_z(v[0]), reflect_z(v[1]), reflect_z(v[2])}, order));
  }
  p.local.resize(nt);
  auto attach = [&](int t, int n, const mesh::BasisFunction& f, double sign) {
    const auto& ids = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (ids[k] != f.vertices[0] && ids[k] != f.vertices[1]) {
        p.local[t][k] = {n, sign * f.length};
        return;
      }
    }
    throw SolverError("basis edge does not belong to its triangle");
  };
  for (std::size_t n = 0; n < basis.functions.size(); ++n) {
    const auto& f = basis.functions[n];
    if (f.plus >= 0) attach(f.plus, int(n), f, +1.0);
    attach(f.minus, int(n), f, -1.0);
  }
  return p;
}

// Integrals over a test/source triangle pair with coordinates relative to
// the respective centroids:
//   s0 = <<G>>, sr = <<r~ G>>, srp = <<r~' G>>, srr = <<r~ . r~' G>>
struct PairTerms {
  cplx s0;
  std::array<cplx, 3> sr{};
  std::array<cplx, 3> srp{};
  cplx srr;
};

inline cplx expjkr_over_r(double k, double r) {
  const double kr = k * r;
  return cplx(std::cos(kr), -std::sin(kr)) / r;
}

// exp(-jkR)/R minus its singular part 1/R - k^2 R / 2; C^2 at R = 0.
inline cplx smooth_kernel(double k, double r) {
  if (r < 1e-30) return cplx(0.0, -k);
  const double kr = k * r;
  const double s = std::sin(0.5 * kr);
  return cplx(0.5 * kr * kr - 2.0 * s * s, -std::sin(kr)) / r;
}

void accumulate_outer(PairTerms& out, const QuadPoint& a, cplx g, const std::array<cplx, 3>& h) {
  const cplx wg = a.w * g;
  out.s0 += wg;
  out.sr[0] += a.rel.x * wg;
  out.sr[1] += a.rel.y * wg;
  out.sr[2] += a.rel.z * wg;
  out.srp[0] += a.w * h[0];
  out.srp[1] += a.w * h[1];
  out.srp[2] += a.w * h[2];
  out.srr += a.w * (a.rel.x * h[0] + a.rel.y * h[1] + a.rel.z * h[2]);
}

PairTerms far_terms(const TriData& p, const TriData& q, double k) {
  PairTerms out;
  for (const QuadPoint& a : p.q) {
    cplx g = 0.0;
    std::array<cplx, 3> h{};
    for (const QuadPoint& b : q.q) {
      const cplx e = b.w * expjkr_over_r(k, norm(a.r - b.r));
      g += e;
      h[0] += b.rel.x * e;
      h[1] += b.rel.y * e;
      h[2] += b.rel.z * e;
    }
    accumulate_outer(out, a, g, h);
  }
  return out;
}

// Triangles sharing a vertex; the potential of one has a log-singular
// gradient on the other, so the outer rule is refined.
bool touching(const TriData& p, const TriData& q) {
  const double tol = 1e-9 * std::max(p.size, q.size);
  for (const Vec3& a : p.v)
    for (const Vec3& b : q.v)
      if (norm(a - b) < tol) return true;
  return false;
}

PairTerms near_terms(const TriData& p, const TriData& q, double k) {
  PairTerms out;
  for (const QuadPoint& a : touching(p, q) ? p.q112 : p.q7) {
    const StaticPotential sp = static_potential(q.v, a.r);
    const double c2 = -0.5 * k * k;
    const Vec3 shift = a.r - q.c;
    const Vec3 hv = sp.vector + sp.scalar * shift + c2 * (sp.vector1 + sp.scalar1 * shift);
    cplx g = sp.scalar + c2 * sp.scalar1;
    std::array<cplx, 3> h{hv.x, hv.y, hv.z};
    for (const QuadPoint& b : q.q) {
      const cplx e = b.w * smooth_kernel(k, norm(a.r - b.r));
      g += e;
      h[0] += b.rel.x * e;
      h[1] += b.rel.y * e;
      h[2] += b.rel.z * e;
    }
    accumulate_outer(out, a, g, h);
  }
  return out;
}

// Plain quadrature on mismatched point sets; only for comparison runs.
PairTerms near_terms_plain(const TriData& p, const TriData& q, double k) {
  PairTerms out;
  for (const QuadPoint& a : p.q7) {
    cplx g = 0.0;
    std::array<cplx, 3> h{};
    for (const QuadPoint& b : q.q3) {
      const cplx e = b.w * expjkr_over_r(k, norm(a.r - b.r));
      g += e;
      h[0] += b.rel.x * e;
      h[1] += b.rel.y * e;
      h[2] += b.rel.z * e;
    }
    accumulate_outer(out, a, g, h);
  }
  return out;
}

using Block = std::array<std::array<cplx, 3>, 3>;

struct Kernel {
  double k;
  double eta;
  double near_factor;
  bool extraction;
};

bool is_near(const TriData& p, const TriData& q, const Kernel& kern) {
  return norm(p.c - q.c) < kern.near_factor * std::max(p.size, q.size);
}

// 3x3 interaction of the free-vertex local edges of P and Q, direct minus
// image. Multiply by +-l_m * +-l_n to get the Z contribution.
Block pair_block(const TriData& p, const TriData& q, const TriData& qi, const Kernel& kern) {
  Block out{};
  for (int pass = 0; pass < 2; ++pass) {
    const TriData& src = pass == 0 ? q : qi;
    const bool near = is_near(p, src, kern);
    PairTerms t;
    if (!near)
      t = far_terms(p, src, kern.k);
    else if (kern.extraction)
      t = near_terms(p, src, kern.k);
    else
      t = near_terms_plain(p, src, kern.k);
    const double inv = 1.0 / (p.area * src.area);
    const cplx ca = cplx(0.0, kern.k * kern.eta * 0.25 * inv * kInv4Pi);
    const cplx cphi = cplx(0.0, -kern.eta / kern.k * inv * kInv4Pi);
    const double sign = pass == 0 ? 1.0 : -1.0;
    for (int i = 0; i < 3; ++i) {
      const Vec3 a = p.v[i] - p.c;
      const cplx ra = a.x * t.srp[0] + a.y * t.srp[1] + a.z * t.srp[2];
      for (int j = 0; j < 3; ++j) {
        const Vec3 b = src.v[j] - src.c;
        const cplx rb = b.x * t.sr[0] + b.y * t.sr[1] + b.z * t.sr[2];
        const cplx aij = t.srr - rb - ra + dot(a, b) * t.s0;
        out[i][j] += sign * (ca * aij + cphi * t.s0);
      }
    }
  }
  return out;
}

// Near pairs are integrated asymmetrically (outer rule on P, analytic inner
// integral on Q), so both orientations are averaged. The result no longer
// depends on which triangle is called P.
Block pair_block_sym(const Prepared& prep, int p, int q, const Kernel& kern) {
  Block b = pair_block(prep.tri[p], prep.tri[q], prep.image[q], kern);
  if (p == q || !(is_near(prep.tri[p], prep.tri[q], kern) ||
                  is_near(prep.tri[p], prep.image[q], kern)))
    return b;
  const Block t = pair_block(prep.tri[q], prep.tri[p], prep.image[p], kern);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b[i][j] = 0.5 * (b[i][j] + t[j][i]);
  return b;
}

Block symmetrised(const Block& b) {
  Block out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = 0.5 * (b[i][j] + b[j][i]);
  return out;
}

Kernel make_kernel(double freq_hz, const SolverConfig& cfg, const Medium& medium) {
  cfg.validate();
  if (!(freq_hz > 0.0)) throw SolverError("frequency must be > 0");
  return {medium.k(freq_hz), medium.eta(), cfg.near_factor, cfg.singularity_extraction};
}

// Computes pair blocks for rows [0, rows) where row i pairs with columns
// col(i, 0..count(i)-1), then scatters them in a fixed order. Rows are
// processed in chunks to bound memory; threads only write their own slots.
template <class Count, class Compute, class Scatter>
void run_rows(int rows, Count count, Compute compute, Scatter scatter) {
  constexpr int kChunk = 32;
  std::vector<Block> buffer;
  std::vector<std::size_t> offset;
  for (int r0 = 0; r0 < rows; r0 += kChunk) {
    const int r1 = std::min(rows, r0 + kChunk);
    offset.assign(r1 - r0 + 1, 0);
    for (int i = r0; i < r1; ++i) offset[i - r0 + 1] = offset[i - r0] + count(i);
    buffer.resize(offset.back());
#pragma omp parallel for schedule(dynamic)
    for (int i = r0; i < r1; ++i) {
      const int n = count(i);
      for (int j = 0; j < n; ++j) buffer[offset[i - r0] + j] = compute(i, j);
    }
    for (int i = r0; i < r1; ++i) {
      const int n = count(i);
      for (int j = 0; j < n; ++j) scatter(i, j, buffer[offset[i - r0] + j]);
    }
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (!valid_rule(quadrature_order))
    throw ConfigError("solver.quadrature_order must be one of 1, 3, 4, 7; got " +
                      std::to_string(quadrature_order));
  if (!(z0 > 0.0)) throw ConfigError("solver.z0 must be > 0 ohm");
  if (eps_eff > 0.0 && eps_eff < 1.0) throw ConfigError("solver.eps_eff must be >= 1 (or 0 for automatic)");
  if (!(pivot_tolerance >= 0.0)) throw ConfigError("solver.pivot_tolerance must be >= 0");
  if (!(near_factor >= 0.0)) throw ConfigError("solver.near_factor must be >= 0");
}

double Medium::k(double freq_hz) const {
  return 2.0 * constants::pi * freq_hz * std::sqrt(eps_eff * mu_r) / constants::c0;
}

double Medium::eta() const { return constants::eta0 * std::sqrt(mu_r / eps_eff); }

double effective_permittivity(const geometry::StackUp& stack, double width_mm) {
  stack.validate();
  if (stack.eps_r == 1.0) return 1.0;
  const double u = width_mm / (stack.d1 + stack.d2);
  const double a = 1.0 + std::log((std::pow(u, 4) + std::pow(u / 52.0, 2)) /
                                  (std::pow(u, 4) + 0.432)) / 49.0 +
                   std::log(1.0 + std::pow(u / 18.1, 3)) / 18.7;
  const double er = stack.eps_r;
  const double b = 0.564 * std::pow((er - 0.9) / (er + 3.0), 0.053);
  const double e = 0.5 * (er + 1.0) + 0.5 * (er - 1.0) * std::pow(1.0 + 10.0 / u, -a * b);
  return std::clamp(e, 1.0, er);
}

cplx green_kernel(const Vec3& r, const Vec3& rp, double k) {
  const double rd = norm(r - rp);
  const double ri = norm(r - reflect_z(rp));
  if (rd == 0.0) throw SolverError("green_kernel: coincident points");
  return kInv4Pi * (expjkr_over_r(k, rd) - expjkr_over_r(k, ri));
}

ZMatrix assemble_impedance(const TriMesh& mesh, const RwgBasis& basis, double freq_hz,
                           const SolverConfig& cfg, const Medium& medium) {
  const Kernel kern = make_kernel(freq_hz, cfg, medium);
  const Prepared prep = prepare(mesh, basis, cfg.quadrature_order);
  const int nt = int(mesh.triangles.size());
  const int n = int(basis.size());
  ZMatrix out;
  out.frequency_ghz = freq_hz * 1e-9;
  out.z = Eigen::MatrixXcd::Zero(n, n);

  run_rows(
      nt, [&](int i) { return nt - i; },
      [&](int i, int j) {
        return pair_block_sym(prep, i, i + j, kern);
      },
      [&](int i, int j, const Block& raw) {
        const int q = i + j;
        const Block b = j == 0 ? symmetrised(raw) : raw;
        for (int ki = 0; ki < 3; ++ki) {
          const LocalBasis& m = prep.local[i][ki];
          if (m.index < 0) continue;
          for (int kj = 0; kj < 3; ++kj) {
            const LocalBasis& nb = prep.local[q][kj];
            if (nb.index < 0) continue;
            const cplx v = m.coef * nb.coef * b[ki][kj];
            out.z(m.index, nb.index) += v;
            if (j != 0) out.z(nb.index, m.index) += v;
          }
        }
      });
  return out;
}

std::array<Eigen::MatrixXcd, 4> assemble_mirror_blocks(const TriMesh& mesh,
                                                       const RwgBasis& basis, double freq_hz,
                                                       const SolverConfig& cfg,
                                                       const Medium& medium) {
  if (mesh.elements != 4 || basis.elements != 4)
    throw SolverError("mirror-block assembly needs a 4-fold symmetric mesh");
  const Kernel kern = make_kernel(freq_hz, cfg, medium);
  const Prepared prep = prepare(mesh, basis, cfg.quadrature_order);
  const int t0 = mesh.triangles_per_element;
  const int n0 = basis.per_element;
  std::array<Eigen::MatrixXcd, 4> blocks;
  for (int e = 0; e < 4; ++e) {
    Eigen::MatrixXcd& z = blocks[e];
    z = Eigen::MatrixXcd::Zero(n0, n0);
    const int shift = e * t0;
    // Pair ((0, j), (e, i)) is the reflection of ((e, j), (0, i)), which is
    // the transpose of ((0, i), (e, j)); only j >= i is computed.
    run_rows(
        t0, [&](int i) { return t0 - i; },
        [&](int i, int j) {
          return pair_block_sym(prep, i, shift + i + j, kern);
        },
        [&](int i, int j, const Block& raw) {
          const int jj = i + j;
          const Block b = j == 0 ? symmetrised(raw) : raw;
          for (int ki = 0; ki < 3; ++ki) {
            const LocalBasis& m = prep.local[i][ki];
            if (m.index < 0) continue;
            for (int kj = 0; kj < 3; ++kj) {
              const LocalBasis& nb = prep.local[jj][kj];
              if (nb.index < 0) continue;
              const cplx v = m.coef * nb.coef * b[ki][kj];
              z(m.index, nb.index) += v;
              if (j != 0) z(nb.index, m.index) += v;
            }
          }
        });
  }
  return blocks;
}

Eigen::MatrixXcd expand_mirror_blocks(const std::array<Eigen::MatrixXcd, 4>& blocks) {
  const Eigen::Index n0 = blocks[0].rows();
  Eigen::MatrixXcd z(4 * n0, 4 * n0);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) z.block(a * n0, b * n0, n0, n0) = blocks[a ^ b];
  return z;
}

}  // namespace carray::em
