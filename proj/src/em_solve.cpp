// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cmath>
#include <cstdio>
#include <string>

#include "carray/em.hpp"

namespace carray::em {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Eigen::PartialPivLU<Eigen::MatrixXcd> factor(const Eigen::MatrixXcd& z, const SolverConfig& cfg) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(z);
  const double rc = lu.rcond();
  if (!(rc > cfg.pivot_tolerance))
    throw SolverError("impedance matrix is singular to working precision (condition estimate " +
                      sci(1.0 / rc) + ")");
  return lu;
}

void check_port(int port, const mesh::RwgBasis& basis) {
  if (port < 1 || port > int(basis.port_basis.size()))
    throw SolverError("port must be in 1.." + std::to_string(basis.port_basis.size()) + ", got " +
                      std::to_string(port));
}

// Character of the Klein four-group: chi_s(e) = (-1)^popcount(s & e).
double chi(int s, int e) { return (std::popcount(unsigned(s & e)) & 1) ? -1.0 : 1.0; }

}  // namespace

Eigen::VectorXcd excite_and_solve(const ZMatrix& z, int port, const mesh::RwgBasis& basis,
                                  const SolverConfig& cfg) {
  check_port(port, basis);
  const int p = basis.port_basis[port - 1];
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(z.z.rows());
  v(p) = basis.functions[p].length;
  return factor(z.z, cfg).solve(v);
}

Matrix4c port_admittance(const mesh::RwgBasis& basis, const ZMatrix& z, const SolverConfig& cfg) {
  if (basis.port_basis.size() != 4) throw SolverError("expected 4 ports");
  const auto lu = factor(z.z, cfg);
  Matrix4c y;
  for (int j = 0; j < 4; ++j) {
    const int pj = basis.port_basis[j];
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(z.z.rows());
    v(pj) = basis.functions[pj].length;
    const Eigen::VectorXcd x = lu.solve(v);
    for (int i = 0; i < 4; ++i) {
      const int pi = basis.port_basis[i];
      y(i, j) = x(pi) * basis.functions[pi].length;
    }
  }
  return y;
}

Matrix4c port_admittance_mirror(const mesh::RwgBasis& basis,
                                const std::array<Eigen::MatrixXcd, 4>& blocks,
                                const SolverConfig& cfg) {
  const int n0 = basis.per_element;
  if (basis.elements != 4 || basis.port_basis.size() != 4)
    throw SolverError("mirror solve needs a 4-fold symmetric basis with 4 ports");
  const int p0 = basis.port_basis[0];
  for (int e = 0; e < 4; ++e)
    if (basis.port_basis[e] != e * n0 + p0)
      throw SolverError("port " + std::to_string(e + 1) + " is not the mirror of port 1");
  const double l = basis.functions[p0].length;

  // Z_{a,b} = B_{a xor b} is diagonalised by the group characters; each
  // symmetry class s is an independent system of size n0.
  std::array<cplx, 4> ys;
  for (int s = 0; s < 4; ++s) {
    Eigen::MatrixXcd zs = blocks[0];
    for (int e = 1; e < 4; ++e) zs += chi(s, e) * blocks[e];
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n0);
    v(p0) = l;
    ys[s] = factor(zs, cfg).solve(v)(p0);
  }
  Matrix4c y;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx acc = 0.0;
      for (int s = 0; s < 4; ++s) acc += chi(s, i) * chi(s, j) * ys[s];
      y(i, j) = 0.25 * l * acc;
    }
  return y;
}

Matrix4c admittance_to_impedance(const Matrix4c& y) {
  for (int i = 0; i < 4; ++i)
    if (!(std::abs(y(i, i)) > 1e-15))
      throw SolverError("port " + std::to_string(i + 1) +
                        " carries near-zero current; port impedance is ill-defined");
  Eigen::FullPivLU<Matrix4c> lu(y);
  if (!lu.isInvertible() || !(lu.rcond() > 1e-14))
    throw SolverError("port admittance matrix is singular; port impedance is ill-defined");
  return lu.inverse();
}

Matrix4c port_impedance_matrix(const mesh::RwgBasis& basis, const ZMatrix& z,
                               const SolverConfig& cfg) {
  return admittance_to_impedance(port_admittance(basis, z, cfg));
}

Matrix4c z_to_s(const Matrix4c& zp, double z0) {
  if (!(z0 > 0.0)) throw SolverError("reference impedance must be > 0");
  const Matrix4c id = Matrix4c::Identity();
  Eigen::FullPivLU<Matrix4c> lu(zp + z0 * id);
  if (!lu.isInvertible() || !(lu.rcond() > 1e-14))
    throw SolverError("Zp + Z0 is singular; S is undefined");
  // S = (Zp - Z0)(Zp + Z0)^-1, solved as (Zp + Z0)^T S^T = (Zp - Z0)^T.
  Eigen::FullPivLU<Matrix4c> lut((zp + z0 * id).transpose());
  return lut.solve((zp - z0 * id).transpose()).transpose();
}

Simulator::Simulator(geometry::SceneGeometry scene, double max_edge_mm, SolverConfig cfg)
    : scene_(std::move(scene)), max_edge_mm_(max_edge_mm), cfg_(cfg) {
  cfg_.validate();
  if (!(max_edge_mm_ > 0.0)) throw ConfigError("mesh.max_edge_len must be > 0 mm");
  medium_.mu_r = scene_.stack.mu_r;
  medium_.eps_eff = cfg_.eps_eff > 0.0 ? cfg_.eps_eff
                                       : effective_permittivity(scene_.stack, scene_.design.W);
}

void Simulator::ensure_mesh() {
  if (mesh_) return;
  mesh_ = mesh::triangulate(scene_, max_edge_mm_);
  basis_ = mesh::build_rwg(*mesh_);
}

const mesh::TriMesh& Simulator::mesh() {
  ensure_mesh();
  return *mesh_;
}

const mesh::RwgBasis& Simulator::basis() {
  ensure_mesh();
  return *basis_;
}

Simulator::PortResult Simulator::solve(double freq_ghz) {
  ensure_mesh();
  const double f = freq_ghz * 1e9;
  Matrix4c y;
  ++assemble_calls_;
  if (cfg_.use_symmetry && basis_->elements == 4) {
    y = port_admittance_mirror(*basis_, assemble_mirror_blocks(*mesh_, *basis_, f, cfg_, medium_),
                               cfg_);
  } else {
    y = port_admittance(*basis_, assemble_impedance(*mesh_, *basis_, f, cfg_, medium_), cfg_);
  }
  PortResult out;
  out.zp = admittance_to_impedance(y);
  out.s = z_to_s(out.zp, cfg_.z0);
  return out;
}

std::vector<double> frequency_grid(double f_start, double f_stop, int n) {
  if (!(f_start < f_stop)) throw ConfigError("sweep needs f_start < f_stop");
  if (n < 2) throw ConfigError("sweep needs at least 2 points");
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = f_start + (f_stop - f_start) * i / (n - 1);
  f.back() = f_stop;
  return f;
}

SParamTable frequency_sweep(Simulator& sim, double f_start, double f_stop, int n_points,
                            const SweepCache* cache) {
  SParamTable table;
  for (double f : frequency_grid(f_start, f_stop, n_points)) {
    SParamRow row;
    row.frequency_ghz = f;
    std::optional<Matrix4c> hit;
    if (cache && cache->load) hit = cache->load(f);
    if (hit) {
      row.s = *hit;
    } else {
      try {
        row.s = sim.solve(f).s;
      } catch (const SolverError& e) {
        throw SolverError(std::string(e.what()) + " (at " + std::to_string(f) + " GHz)");
      }
      if (cache && cache->store) cache->store(f, row.s);
    }
    table.rows.push_back(row);
  }
  return table;
}

SParamTable frequency_sweep(const geometry::SceneGeometry& scene, double max_edge_mm,
                            const SolverConfig& cfg, double f_start, double f_stop,
                            int n_points) {
  Simulator sim(scene, max_edge_mm, cfg);
  return frequency_sweep(sim, f_start, f_stop, n_points);
}

Resonance find_minimum(const std::vector<double>& f, const std::vector<double>& y) {
  if (f.empty() || f.size() != y.size()) throw SolverError("find_resonance needs a nonempty table");
  std::size_t m = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] < y[m]) m = i;
  Resonance r;
  r.index = m;
  r.frequency_ghz = f[m];
  r.magnitude = y[m];
  r.bracketed = m > 0 && m + 1 < y.size();
  if (!r.bracketed) return r;
  const double x0 = f[m - 1], x1 = f[m], x2 = f[m + 1];
  const double y0 = y[m - 1], y1 = y[m], y2 = y[m + 1];
  const double d0 = (y1 - y0) / (x1 - x0);
  const double d1 = (y2 - y1) / (x2 - x1);
  const double a = (d1 - d0) / (x2 - x0);
  if (!(a > 0.0)) return r;
  const double xv = 0.5 * (x0 + x1) - d0 / (2.0 * a);
  r.frequency_ghz = xv;
  // Newton form: p(x) = y0 + d0 (x - x0) + a (x - x0)(x - x1).
  r.magnitude = y0 + d0 * (xv - x0) + a * (xv - x0) * (xv - x1);
  return r;
}

Resonance find_resonance(const SParamTable& table, int port) {
  if (port < 1 || port > 4) throw SolverError("port must be in 1..4");
  std::vector<double> f, y;
  for (const auto& row : table.rows) {
    f.push_back(row.frequency_ghz);
    y.push_back(std::abs(row.s(port - 1, port - 1)));
  }
  return find_minimum(f, y);
}

}  // namespace carray::em
