#pragma once

#include <Eigen/Cholesky>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "vvs/csr.hpp"
#include "vvs/dense.hpp"
#include "vvs/elements.hpp"

namespace vvs {

/// Pointwise viscosity: a scalar coefficient, optionally with the rank-one
/// fourth-order correction arising from Newton linearization. The correction
/// subtracts scale * (E otimes T)_sym from the identity, i.e. the viscous
/// flux applied to a strain a is
///   2 mu [ a - scale * (E (T:a) + T (E:a)) / 2 ].
struct ViscositySample {
  double mu = 1.0;
  bool anisotropic = false;
  double exx = 0, eyy = 0, exy = 0;  // E
  double txx = 0, tyy = 0, txy = 0;  // T
  double scale = 0;
};

class ViscosityModel {
 public:
  virtual ~ViscosityModel() = default;
  virtual ViscositySample sample(Vec2 x) const = 0;
  double scalar(Vec2 x) const { return sample(x).mu; }
};

class ConstantViscosity final : public ViscosityModel {
 public:
  explicit ConstantViscosity(double mu) : mu_(mu) {}
  ViscositySample sample(Vec2) const override { return {.mu = mu_}; }

 private:
  double mu_;
};

/// Block-diagonal SPD matrix with one dense block per cell (pressure mass
/// matrices and their weighted variants).
struct BlockDiagMatrix {
  int block_size = 0;
  std::vector<DenseMatrix> blocks;
  std::vector<Eigen::LLT<DenseMatrix>> chol;

  int n() const { return block_size * static_cast<int>(blocks.size()); }
  void factorize();
  void apply(std::span<const double> x, std::span<double> y) const;
  void apply_inverse(std::span<const double> x, std::span<double> y) const;
  CsrMatrix to_csr() const;
};

/// Viscous block [A]_ij = (2 mu eps(phi_i), eps(phi_j)), no boundary
/// conditions applied. quad_degree 0 selects the default 2k+2.
CsrMatrix assemble_viscous_block(const FunctionSpace& V, const ViscosityModel& visc,
                                 int quad_degree = 0);

/// Divergence block [B]_ij = -(psi_i, div phi_j), no boundary conditions.
CsrMatrix assemble_divergence(const FunctionSpace& V, const FunctionSpace& Q);

/// Pressure mass; with inverse_weight != nullptr assembles (w^{-1} psi_i, psi_j)
/// where w is the model's scalar viscosity.
BlockDiagMatrix assemble_pressure_mass(const FunctionSpace& Q,
                                       const ViscosityModel* inverse_weight = nullptr);

/// Explicit B^T W^{-1} B (cell-local coupling only).
CsrMatrix assemble_div_penalty(const CsrMatrix& B, const BlockDiagMatrix& W,
                               const FunctionSpace& Q);

/// A_gamma = A + gamma * penalty with merged sparsity; gamma = 0 copies A.
CsrMatrix assemble_augmented(const CsrMatrix& A, const CsrMatrix& penalty, double gamma);

std::vector<double> augmented_rhs(std::span<const double> r1, std::span<const double> r2,
                                  const CsrMatrix& B, const BlockDiagMatrix& W,
                                  double gamma);

std::vector<double> assemble_load_vector(const FunctionSpace& V,
                                         const std::function<Vec2(Vec2)>& f,
                                         int quad_degree = 0);

/// Nonlinear viscous residual (2 mu(x) eps(u), eps(phi_i)) with mu sampled
/// from the model (anisotropic parts ignored: this is the plain flux of the
/// current state).
std::vector<double> viscous_residual(const FunctionSpace& V, const ViscosityModel& visc,
                                     std::span<const double> u, int quad_degree = 0);

/// Symmetric elimination: Dirichlet rows and columns zeroed, unit diagonal.
void symmetric_dirichlet_eliminate(CsrMatrix& A, const FunctionSpace& V);
void eliminate_dirichlet_columns(CsrMatrix& B, const FunctionSpace& V);

enum class WChoice { Mp, MpInvVisc };

/// All discrete operators of one linear(ized) Stokes problem, with Dirichlet
/// conditions eliminated symmetrically and the boundary data moved to the
/// right-hand side.
struct StokesBlocks {
  const FunctionSpace* V = nullptr;
  const FunctionSpace* Q = nullptr;
  CsrMatrix A, B, Bt;
  CsrMatrix div_penalty;  // B^T W^{-1} B for the chosen W
  CsrMatrix A_gamma;
  BlockDiagMatrix Mp, Mp_invvisc;
  double gamma = 0;
  WChoice w_choice = WChoice::Mp;
  std::vector<double> rhs_u, rhs_p;  // constrained right-hand sides
  std::vector<double> rhs_u_aug;
  std::vector<double> bc_values;  // full-size Dirichlet lift

  const BlockDiagMatrix& W() const {
    return w_choice == WChoice::Mp ? Mp : Mp_invvisc;
  }
};

StokesBlocks assemble_stokes(const FunctionSpace& V, const FunctionSpace& Q,
                             const ViscosityModel& visc,
                             const std::function<Vec2(Vec2)>& force, double gamma,
                             WChoice w);

}  // namespace vvs
