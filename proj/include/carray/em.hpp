// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_EM_HPP
#define CARRAY_EM_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "carray/geometry.hpp"
#include "carray/mesh.hpp"

// Mixed-potential EFIE over RWG functions in a homogeneous medium of
// permittivity eps_eff above a PEC ground plane at z = 0.
namespace carray::em {

using cplx = std::complex<double>;
using Matrix4c = Eigen::Matrix<cplx, 4, 4>;

struct SolverConfig {
  int quadrature_order = 4;           // points per triangle: 1, 3, 4 or 7
  bool singularity_extraction = true;
  double eps_eff = 0.0;               // <= 0: derive from the stack
  double z0 = 50.0;                   // reference impedance, ohm
  double pivot_tolerance = 1e-14;     // reciprocal condition floor for LU
  double near_factor = 2.0;           // near pair: centroid distance < factor * size
  bool use_symmetry = true;           // block-diagonalise mirror-symmetric meshes

  void validate() const;
};

struct ZMatrix {
  double frequency_ghz = 0.0;
  Eigen::MatrixXcd z;
};

struct SParamRow {
  double frequency_ghz = 0.0;
  Matrix4c s;
};

struct SParamTable {
  std::vector<SParamRow> rows;
};

// Hammerstad quasi-static effective permittivity of a strip of the patch
// width on a substrate of height d1 + d2.
double effective_permittivity(const geometry::StackUp& stack, double width_mm);

// g(R) - g(R_img), g(R) = exp(-jkR) / (4 pi R), image point (x', y', -z').
cplx green_kernel(const Vec3& r, const Vec3& rp, double k);

// Wavenumber and wave impedance of the effective medium.
struct Medium {
  double eps_eff = 1.0;
  double mu_r = 1.0;

  double k(double freq_hz) const;
  double eta() const;
};

// Full N x N matrix, assembled pair by pair over all triangles.
ZMatrix assemble_impedance(const mesh::TriMesh& mesh, const mesh::RwgBasis& basis,
                           double freq_hz, const SolverConfig& cfg, const Medium& medium);

// For bases with 4-fold mirror structure: the first block row Z_{0,e},
// e = 0..3. The full matrix is Z_{a,b} = Z_{0, a xor b}.
std::array<Eigen::MatrixXcd, 4> assemble_mirror_blocks(const mesh::TriMesh& mesh,
                                                       const mesh::RwgBasis& basis,
                                                       double freq_hz, const SolverConfig& cfg,
                                                       const Medium& medium);

Eigen::MatrixXcd expand_mirror_blocks(const std::array<Eigen::MatrixXcd, 4>& blocks);

// Delta-gap excitation of `port` (1-based) and dense LU solve.
Eigen::VectorXcd excite_and_solve(const ZMatrix& z, int port, const mesh::RwgBasis& basis,
                                  const SolverConfig& cfg = {});

// Short-circuit admittance from four port solves, Zp = Y^-1.
Matrix4c port_admittance(const mesh::RwgBasis& basis, const ZMatrix& z,
                         const SolverConfig& cfg = {});
Matrix4c port_admittance_mirror(const mesh::RwgBasis& basis,
                                const std::array<Eigen::MatrixXcd, 4>& blocks,
                                const SolverConfig& cfg = {});
Matrix4c port_impedance_matrix(const mesh::RwgBasis& basis, const ZMatrix& z,
                               const SolverConfig& cfg = {});
Matrix4c admittance_to_impedance(const Matrix4c& y);

Matrix4c z_to_s(const Matrix4c& zp, double z0);

// Mesh, basis and medium for one scene; solves single frequencies.
class Simulator {
 public:
  Simulator(geometry::SceneGeometry scene, double max_edge_mm, SolverConfig cfg);

  const geometry::SceneGeometry& scene() const { return scene_; }
  const mesh::TriMesh& mesh();
  const mesh::RwgBasis& basis();
  double eps_eff() const { return medium_.eps_eff; }
  double max_edge_mm() const { return max_edge_mm_; }
  const SolverConfig& config() const { return cfg_; }

  struct PortResult {
    Matrix4c zp;
    Matrix4c s;
  };
  PortResult solve(double freq_ghz);

  std::size_t assemble_calls() const { return assemble_calls_; }

 private:
  void ensure_mesh();

  geometry::SceneGeometry scene_;
  double max_edge_mm_;
  SolverConfig cfg_;
  Medium medium_;
  std::optional<mesh::TriMesh> mesh_;
  std::optional<mesh::RwgBasis> basis_;
  std::size_t assemble_calls_ = 0;
};

// Uniform grid f_start..f_stop with n points (GHz).
std::vector<double> frequency_grid(double f_start, double f_stop, int n);

// Per-point hook so callers can serve rows from a cache. Return nullopt to
// request a fresh solve; `store` receives every freshly solved row.
struct SweepCache {
  std::function<std::optional<Matrix4c>(double freq_ghz)> load;
  std::function<void(double freq_ghz, const Matrix4c& s)> store;
};

SParamTable frequency_sweep(Simulator& sim, double f_start, double f_stop, int n_points,
                            const SweepCache* cache = nullptr);
SParamTable frequency_sweep(const geometry::SceneGeometry& scene, double max_edge_mm,
                            const SolverConfig& cfg, double f_start, double f_stop,
                            int n_points);

struct Resonance {
  double frequency_ghz = 0.0;
  double magnitude = 0.0;  // interpolated |S_pp|
  bool bracketed = false;
  std::size_t index = 0;   // grid index of the discrete minimum
};

// Parabola through the discrete minimum of |S_pp| and its neighbours.
Resonance find_resonance(const SParamTable& table, int port);
Resonance find_minimum(const std::vector<double>& f, const std::vector<double>& y);

}  // namespace carray::em

#endif  // CARRAY_EM_HPP
