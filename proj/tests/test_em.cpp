// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "carray/em.hpp"
#include "carray/potential.hpp"
#include "carray/quadrature.hpp"

using namespace carray;
using namespace carray::em;
using geometry::build_scene;
using geometry::PatchDesign;
using geometry::StackUp;

namespace {

// Accumulators for the brute-force integrals.
struct Acc {
  cplx vec, sca;
  Acc& operator+=(const Acc& o) {
    vec += o.vec;
    sca += o.sca;
    return *this;
  }
  friend Acc operator*(double s, const Acc& a) { return {s * a.vec, s * a.sca}; }
};

struct V {
  double s;
  Vec3 v;
  V& operator+=(const V& o) {
    s += o.s;
    v += o.v;
    return *this;
  }
  friend V operator*(double k, const V& a) { return {k * a.s, k * a.v}; }
};

// Gauss-Legendre nodes/weights on [0, 1] by Newton iteration.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) {
    for (int i = 0; i < n; ++i) {
      double t = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        const double dt = p1 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-16) break;
      }
      x.push_back(0.5 * (1.0 - t));
      w.push_back(1.0 / ((1.0 - t * t) * dp * dp));
    }
  }
};

// Collapsed (Duffy) product rule over triangle (apex, a, b): the Jacobian
// vanishes at the apex, cancelling a 1/R singularity there. Signed area.
template <class F>
auto duffy(Vec3 apex, Vec3 a, Vec3 b, const GaussLegendre& g, F f) {
  const Vec3 n = cross(a - apex, b - apex);
  decltype(f(apex)) acc{};
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double u = g.x[i];
    for (std::size_t j = 0; j < g.x.size(); ++j) {
      const double v = g.x[j];
      const Vec3 r = apex + u * ((a - apex) + v * (b - a));
      acc += (g.w[i] * g.w[j] * u) * f(r);
    }
  }
  // Orientation relative to the triangle normal is applied by the caller.
  return std::make_pair(acc, n);
}

// Integral over triangle tri of f, split at point p lying in its plane.
template <class F>
auto split_integral(const std::array<Vec3, 3>& tri, Vec3 p, const GaussLegendre& g, F f) {
  const Vec3 nt = cross(tri[1] - tri[0], tri[2] - tri[0]);
  decltype(f(p)) acc{};
  for (int i = 0; i < 3; ++i) {
    auto [val, n] = duffy(p, tri[i], tri[(i + 1) % 3], g, f);
    const double sgn = dot(n, nt) >= 0 ? 1.0 : -1.0;
    acc += (sgn * norm(n)) * val;
  }
  return acc;
}

// Brute-force Z11 for one RWG on a horizontal two-triangle plate, using the
// kernel g(R) - g(R_img) directly.
cplx brute_z11(const std::array<Vec3, 3>& tp, const std::array<Vec3, 3>& tm, Vec3 free_p,
               Vec3 free_m, double len, double k, double eta) {
  const GaussLegendre outer(16), inner(24);
  const std::array<const std::array<Vec3, 3>*, 2> tris{&tp, &tm};
  const std::array<Vec3, 2> free{free_p, free_m};
  const std::array<double, 2> sign{1.0, -1.0};
  auto area = [](const std::array<Vec3, 3>& t) {
    return 0.5 * norm(cross(t[1] - t[0], t[2] - t[0]));
  };
  cplx z = 0.0;
  for (int P = 0; P < 2; ++P) {
    for (int Q = 0; Q < 2; ++Q) {
      const auto& T = *tris[P];
      const auto& S = *tris[Q];
      const double ap = area(T), aq = area(S);
      auto outer_f = [&](Vec3 r) {
        const Vec3 fr = r - free[P];
        auto inner_f = [&](Vec3 rp) {
          const cplx g = green_kernel(r, rp, k);
          return Acc{dot(fr, rp - free[Q]) * g, g};
        };
        return split_integral(S, r, inner, inner_f);
      };
      auto [val, n] = duffy(T[0], T[1], T[2], outer, outer_f);
      const Acc tot = norm(n) * val;
      const double c = sign[P] * sign[Q] * len * len / (ap * aq);
      z += c * (cplx(0.0, k * eta / 4.0) * tot.vec - cplx(0.0, eta / k) * tot.sca);
    }
  }
  return z;
}

mesh::TriMesh plate(double side, double height) {
  mesh::TriMesh m;
  m.vertices = {{0, 0, height}, {side, 0, height}, {side, side, height}, {0, side, height}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.triangle_polygon = {0, 0};
  return m;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

struct CoarseScene {
  geometry::SceneGeometry scene = build_scene({}, {}, {}, {});
  mesh::TriMesh mesh = mesh::triangulate(scene, 2.4);
  mesh::RwgBasis basis = mesh::build_rwg(mesh);
  Medium medium{effective_permittivity(scene.stack, scene.design.W), 1.0};
};

const CoarseScene& coarse() {
  static const CoarseScene s;
  return s;
}

}  // namespace

TEST(EffectivePermittivity, AirIsExactlyOne) {
  StackUp s;
  s.eps_r = 1.0;
  EXPECT_EQ(effective_permittivity(s, 11.55), 1.0);
}

TEST(EffectivePermittivity, HandEvaluatedBaseline) {
  const double e = effective_permittivity(StackUp{}, 11.55);
  EXPECT_GT(e, 2.0);
  EXPECT_LT(e, 3.0);
  EXPECT_NEAR(e, 2.714027752299299, 1e-12);
}

TEST(EffectivePermittivity, MonotoneInEpsR) {
  double prev = 0.0;
  for (double er = 1.0; er <= 12.0; er += 0.25) {
    StackUp s;
    s.eps_r = er;
    const double e = effective_permittivity(s, 11.55);
    EXPECT_GE(e, prev);
    EXPECT_GE(e, 1.0);
    EXPECT_LE(e, er);
    prev = e;
  }
}

TEST(GreenKernel, StaticFarFromGround) {
  const cplx g = green_kernel({0, 0, 1e9}, {1, 0, 1e9}, 0.0);
  EXPECT_NEAR(g.real(), 0.0795775, 1e-7);
  EXPECT_NEAR(g.imag(), 0.0, 1e-15);
}

TEST(GreenKernel, VanishesOnGroundPlane) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  for (int i = 0; i < 100; ++i) {
    const Vec3 r{u(rng), u(rng), 0.0};
    const Vec3 rp{u(rng), u(rng), std::abs(u(rng)) + 1e-4};
    const double k = 300.0 * (1.0 + std::abs(u(rng)));
    const cplx g = green_kernel(r, rp, k);
    const double direct = 1.0 / (4.0 * constants::pi * norm(r - rp));
    EXPECT_LE(std::abs(g), 1e-12 * direct);
  }
}

TEST(GreenKernel, MatchesExtendedPrecision) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int i = 0; i < 200; ++i) {
    const Vec3 r{u(rng), u(rng), std::abs(u(rng))};
    const Vec3 rp{u(rng), u(rng), std::abs(u(rng))};
    const double k = 50.0 + 400.0 * std::abs(u(rng)) * 20.0;
    using ld = long double;
    auto dist = [](ld ax, ld ay, ld az, ld bx, ld by, ld bz) {
      return std::sqrt((ax - bx) * (ax - bx) + (ay - by) * (ay - by) + (az - bz) * (az - bz));
    };
    const ld rd = dist(r.x, r.y, r.z, rp.x, rp.y, rp.z);
    const ld ri = dist(r.x, r.y, r.z, rp.x, rp.y, -ld(rp.z));
    const ld pi = 3.141592653589793238462643383279502884L;
    const ld re = std::cos(k * rd) / (4 * pi * rd) - std::cos(k * ri) / (4 * pi * ri);
    const ld im = -std::sin(k * rd) / (4 * pi * rd) + std::sin(k * ri) / (4 * pi * ri);
    const cplx g = green_kernel(r, rp, k);
    const double scale = double(1.0L / (4 * pi * rd));
    EXPECT_NEAR(g.real(), double(re), 1e-13 * scale);
    EXPECT_NEAR(g.imag(), double(im), 1e-13 * scale);
  }
}

TEST(Quadrature, PolynomialExactness) {
  // Integral over the unit right triangle of x^a y^b = a! b! / (a + b + 2)!.
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  const std::array<Vec3, 3> tri{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}};
  for (auto [order, degree] : {std::pair{1, 1}, {3, 2}, {4, 3}, {7, 5}}) {
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double q = 0.0;
        for (const auto& p : triangle_rule(order)) {
          const Vec3 r = barycentric(tri, p.bary);
          q += 0.5 * p.weight * std::pow(r.x, a) * std::pow(r.y, b);
        }
        EXPECT_NEAR(q, fact(a) * fact(b) / fact(a + b + 2), 1e-15)
            << "order " << order << " x^" << a << " y^" << b;
      }
    }
  }
  EXPECT_THROW(triangle_rule(5), SolverError);
}

TEST(StaticPotential, MatchesDuffyQuadrature) {
  const std::array<Vec3, 3> tri{Vec3{0.1, 0.2, 0.3}, Vec3{1.3, 0.1, 0.3}, Vec3{0.4, 1.1, 0.3}};
  const GaussLegendre g(40);
  const std::vector<Vec3> pts = {
      {0.5, 0.4, 0.3},    // inside
      {0.1, 0.2, 0.3},    // vertex
      {0.7, 0.15, 0.3},   // on an edge
      {2.0, 2.0, 0.3},    // in plane, outside
      {0.5, 0.4, 0.35},   // just above
      {0.5, 0.4, -0.7},   // below
      {1.9, -0.4, 0.9},   // far off
  };
  for (const Vec3& p : pts) {
    const StaticPotential sp = static_potential(tri, p);
    // Split at the projection of p; the integrand is then smooth in the
    // collapsed coordinates even when p lies on the triangle.
    const Vec3 n = cross(tri[1] - tri[0], tri[2] - tri[0]);
    const Vec3 nh = (1.0 / norm(n)) * n;
    const Vec3 proj = p - dot(p - tri[0], nh) * nh;
    const V ref = split_integral(tri, proj, g, [&](Vec3 rp) {
      const double r = norm(p - rp);
      return V{1.0 / r, (1.0 / r) * (rp - p)};
    });
    EXPECT_NEAR(sp.scalar, ref.s, 1e-9 * std::abs(ref.s) + 1e-12);
    EXPECT_NEAR(sp.vector.x, ref.v.x, 1e-9 * norm(ref.v) + 1e-12);
    EXPECT_NEAR(sp.vector.y, ref.v.y, 1e-9 * norm(ref.v) + 1e-12);
    EXPECT_NEAR(sp.vector.z, ref.v.z, 1e-9 * norm(ref.v) + 1e-12);
  }
}

TEST(AssembleImpedance, PlateSelfTermMatchesBruteForce) {
  const double side = 4e-3, height = 1e-3, f = 8.55e9;
  const mesh::TriMesh m = plate(side, height);
  const mesh::RwgBasis b = mesh::build_rwg(m);
  ASSERT_EQ(b.size(), 1u);
  const Medium medium{2.7, 1.0};
  const ZMatrix z = assemble_impedance(m, b, f, SolverConfig{}, medium);
  const auto& fn = b.functions[0];
  auto tri = [&](int t) {
    return std::array<Vec3, 3>{m.vertices[m.triangles[t][0]], m.vertices[m.triangles[t][1]],
                               m.vertices[m.triangles[t][2]]};
  };
  auto free_vertex = [&](int t) {
    for (int v : m.triangles[t])
      if (v != fn.vertices[0] && v != fn.vertices[1]) return m.vertices[v];
    return Vec3{};
  };
  const cplx ref = brute_z11(tri(fn.plus), tri(fn.minus), free_vertex(fn.plus),
                             free_vertex(fn.minus), fn.length, medium.k(f), medium.eta());
  EXPECT_LE(std::abs(z.z(0, 0) - ref), 0.005 * std::abs(ref))
      << "got " << z.z(0, 0) << " brute force " << ref;
}

TEST(AssembleImpedance, GalerkinSymmetry) {
  const auto& c = coarse();
  const ZMatrix z = assemble_impedance(c.mesh, c.basis, 8.55e9, {}, c.medium);
  EXPECT_LE(max_abs(z.z - z.z.transpose()), 1e-12 * max_abs(z.z));
}

TEST(AssembleImpedance, MirrorBlocksMatchFullAssembly) {
  const auto& c = coarse();
  const ZMatrix z = assemble_impedance(c.mesh, c.basis, 8.55e9, {}, c.medium);
  const auto blocks = assemble_mirror_blocks(c.mesh, c.basis, 8.55e9, {}, c.medium);
  const Eigen::MatrixXcd zx = expand_mirror_blocks(blocks);
  EXPECT_LE(max_abs(z.z - zx), 1e-12 * max_abs(z.z));
  for (const auto& bl : blocks) EXPECT_LE(max_abs(bl - bl.transpose()), 1e-12 * max_abs(z.z));
}

TEST(AssembleImpedance, QuadratureOrderConvergence) {
  const auto scene = build_scene({}, {}, {}, {});
  const auto m = mesh::triangulate(scene, 1.2);
  const auto b = mesh::build_rwg(m);
  const Medium medium{effective_permittivity(scene.stack, scene.design.W), 1.0};
  auto fro = [&](int order) {
    SolverConfig cfg;
    cfg.quadrature_order = order;
    double s = 0.0;
    for (const auto& bl : assemble_mirror_blocks(m, b, 8.55e9, cfg, medium))
      s += 4.0 * bl.squaredNorm();
    return std::sqrt(s);
  };
  const double n3 = fro(3), n7 = fro(7);
  EXPECT_LT(std::abs(n7 - n3), 0.01 * n7);
}

TEST(ExciteAndSolve, ResidualAndMirrorCurrents) {
  const auto& c = coarse();
  ZMatrix z;
  z.z = expand_mirror_blocks(assemble_mirror_blocks(c.mesh, c.basis, 8.3e9, {}, c.medium));
  const Eigen::VectorXcd x1 = excite_and_solve(z, 1, c.basis);
  const Eigen::VectorXcd x2 = excite_and_solve(z, 2, c.basis);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(x1.size());
  const int p = c.basis.port_basis[0];
  v(p) = c.basis.functions[p].length;
  EXPECT_LE((z.z * x1 - v).norm() / v.norm(), 1e-10);
  // Port 2 is the x-reflection of port 1: element e <-> e ^ 1.
  const int n0 = c.basis.per_element;
  const double scale = x1.cwiseAbs().maxCoeff();
  for (int e = 0; e < 4; ++e)
    for (int k = 0; k < n0; ++k)
      EXPECT_NEAR(std::abs(x2((e ^ 1) * n0 + k)), std::abs(x1(e * n0 + k)), 1e-8 * scale);
}

TEST(ExciteAndSolve, ThreeByThreeClosedForm) {
  Eigen::Matrix3cd a;
  a << cplx(4, 1), cplx(1, -2), cplx(0.5, 0), cplx(1, -2), cplx(3, 0.5), cplx(-1, 1),
      cplx(0.5, 0), cplx(-1, 1), cplx(5, -3);
  // Inverse by cofactors.
  auto m = [&](int i, int j) { return a((i + 3) % 3, (j + 3) % 3); };
  Eigen::Matrix3cd adj;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      adj(j, i) = m(i + 1, j + 1) * m(i + 2, j + 2) - m(i + 1, j + 2) * m(i + 2, j + 1);
  const cplx det = a(0, 0) * adj(0, 0) + a(0, 1) * adj(1, 0) + a(0, 2) * adj(2, 0);
  const Eigen::Matrix3cd inv = adj / det;

  mesh::RwgBasis basis;
  basis.functions.resize(3);
  const double len[3] = {0.5, 2.0, 1.5};
  for (int i = 0; i < 3; ++i) basis.functions[i].length = len[i];
  basis.port_basis = {2, 0, 1};
  ZMatrix z;
  z.z = a;
  for (int port = 1; port <= 3; ++port) {
    const int p = basis.port_basis[port - 1];
    const Eigen::VectorXcd x = excite_and_solve(z, port, basis);
    for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(x(i) - inv(i, p) * len[p]), 1e-14);
  }
  EXPECT_THROW(excite_and_solve(z, 4, basis), SolverError);
}

TEST(ExciteAndSolve, SingularMatrixReported) {
  mesh::RwgBasis basis;
  basis.functions.resize(2);
  basis.functions[0].length = basis.functions[1].length = 1.0;
  basis.port_basis = {0};
  ZMatrix z;
  z.z = Eigen::MatrixXcd::Ones(2, 2);
  try {
    excite_and_solve(z, 1, basis);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("condition"), std::string::npos);
  }
}

TEST(PortImpedance, ReciprocityAndSymmetry) {
  const auto scene = build_scene({}, {}, {}, {});
  const auto m = mesh::triangulate(scene, 1.2);
  const auto b = mesh::build_rwg(m);
  const Medium medium{effective_permittivity(scene.stack, scene.design.W), 1.0};
  ZMatrix z;
  z.z = expand_mirror_blocks(assemble_mirror_blocks(m, b, 8.55e9, {}, medium));
  const Matrix4c zp = port_impedance_matrix(b, z);
  auto rel = [](cplx a, cplx c) { return std::abs(a - c) / std::abs(a); };
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_LE(rel(zp(i, j), zp(j, i)), 1e-8);
  for (int i = 1; i < 4; ++i) EXPECT_LE(rel(zp(0, 0), zp(i, i)), 1e-6);
  EXPECT_LE(rel(zp(0, 1), zp(2, 3)), 1e-6);
  EXPECT_LE(rel(zp(0, 2), zp(1, 3)), 1e-6);
  EXPECT_LE(rel(zp(0, 3), zp(1, 2)), 1e-6);

  // The block-diagonalised solve gives the same port matrix.
  const Matrix4c zm =
      admittance_to_impedance(port_admittance_mirror(b, assemble_mirror_blocks(m, b, 8.55e9, {},
                                                                               medium)));
  EXPECT_LE((zm - zp).cwiseAbs().maxCoeff(), 1e-9 * zp.cwiseAbs().maxCoeff());
}

TEST(PortImpedance, GenericPathSymmetry) {
  const auto& c = coarse();
  const ZMatrix z = assemble_impedance(c.mesh, c.basis, 8.55e9, {}, c.medium);
  const Matrix4c zp = port_impedance_matrix(c.basis, z);
  auto rel = [](cplx a, cplx b) { return std::abs(a - b) / std::abs(a); };
  for (int i = 1; i < 4; ++i) EXPECT_LE(rel(zp(0, 0), zp(i, i)), 1e-6);
  EXPECT_LE(rel(zp(0, 1), zp(2, 3)), 1e-6);
  EXPECT_LE(rel(zp(0, 2), zp(1, 3)), 1e-6);
  EXPECT_LE(rel(zp(0, 3), zp(1, 2)), 1e-6);
}

TEST(ZToS, MatchedAndShorted) {
  const Matrix4c s0 = z_to_s(50.0 * Matrix4c::Identity(), 50.0);
  EXPECT_LE(s0.cwiseAbs().maxCoeff(), 1e-15);
  const Matrix4c s1 = z_to_s(Matrix4c::Zero(), 50.0);
  EXPECT_LE((s1 + Matrix4c::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ZToS, MatchesWaveDefinition) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix4c zp;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) zp(i, j) = zp(j, i) = cplx(std::abs(n(rng)), n(rng));
    const double z0 = 50.0;
    const Matrix4c s = z_to_s(zp, z0);
    // Drive each port with unit current, all others open: V = Zp I.
    // a = (V + Z0 I) / (2 sqrt Z0), b = (V - Z0 I) / (2 sqrt Z0), b = S a.
    for (int j = 0; j < 4; ++j) {
      Eigen::Matrix<cplx, 4, 1> cur = Eigen::Matrix<cplx, 4, 1>::Zero();
      cur(j) = 1.0;
      const auto v = zp * cur;
      const auto a = (v + z0 * cur) / (2.0 * std::sqrt(z0));
      const auto bw = (v - z0 * cur) / (2.0 * std::sqrt(z0));
      EXPECT_LE((s * a - bw).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_LE((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(FindResonance, ExactParabola) {
  std::vector<double> f, y;
  for (int i = 0; i <= 40; ++i) {
    f.push_back(7.5 + 0.05 * i);
    y.push_back((f.back() - 8.55) * (f.back() - 8.55) + 0.01);
  }
  const Resonance r = find_minimum(f, y);
  EXPECT_TRUE(r.bracketed);
  EXPECT_NEAR(r.frequency_ghz, 8.55, 1e-6);
  EXPECT_NEAR(r.magnitude, 0.01, 1e-9);
  // Off-grid optimum.
  for (auto& v : y) v = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) y[i] = (f[i] - 8.5321) * (f[i] - 8.5321) + 0.01;
  EXPECT_NEAR(find_minimum(f, y).frequency_ghz, 8.5321, 1e-9);
}

TEST(FindResonance, MonotoneIsUnbracketed) {
  SParamTable t;
  for (int i = 0; i < 10; ++i) {
    SParamRow row;
    row.frequency_ghz = 8.0 + 0.1 * i;
    row.s = Matrix4c::Identity() * (1.0 - 0.05 * i);
    t.rows.push_back(row);
  }
  const Resonance r = find_resonance(t, 1);
  EXPECT_FALSE(r.bracketed);
  EXPECT_EQ(r.index, 9u);
}

TEST(FrequencySweep, RowsReciprocityPassivity) {
  const auto& c = coarse();
  const SParamTable t = frequency_sweep(c.scene, 2.4, {}, 7.5, 9.5, 41);
  ASSERT_EQ(t.rows.size(), 41u);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (i > 0) EXPECT_GT(t.rows[i].frequency_ghz, t.rows[i - 1].frequency_ghz);
    const Matrix4c& s = t.rows[i].s;
    EXPECT_LE((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-8);
    Eigen::JacobiSVD<Matrix4c> svd(s);
    EXPECT_LE(svd.singularValues()(0), 1.02);
  }
  EXPECT_DOUBLE_EQ(t.rows.front().frequency_ghz, 7.5);
  EXPECT_DOUBLE_EQ(t.rows.back().frequency_ghz, 9.5);
}

TEST(FrequencySweep, SymmetricAndGenericPathsAgree) {
  const auto& c = coarse();
  SolverConfig plain;
  plain.use_symmetry = false;
  Simulator a(c.scene, 2.4, {});
  Simulator b(c.scene, 2.4, plain);
  const Matrix4c sa = a.solve(8.4).s;
  const Matrix4c sb = b.solve(8.4).s;
  EXPECT_LE((sa - sb).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(a.assemble_calls(), 1u);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  c.quadrature_order = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.z0 = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.eps_eff = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
}
