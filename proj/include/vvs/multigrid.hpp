#pragma once

#include <Eigen/Cholesky>
#include <array>
#include <memory>
#include <span>
#include <vector>

#include "vvs/assembly.hpp"
#include "vvs/krylov.hpp"
#include "vvs/mesh.hpp"

namespace vvs {

struct PatchSolve {
  std::vector<int> dofs;
  Eigen::LLT<DenseMatrix> chol;
};

/// Star-patch parallel subspace correction smoother: all patch solves read
/// the same residual and the damped corrections are summed.
struct SmootherPatches {
  double tau = 0.25;
  std::vector<PatchSolve> patches;
};

SmootherPatches build_smoother(const CsrMatrix& A_gamma,
                               const std::vector<StarPatch>& stars, double tau = 0.25);
void smooth(const SmootherPatches& s, const CsrMatrix& A_gamma, std::span<double> x,
            std::span<const double> b, int steps);

struct JacobiSmoother {
  double tau = 2.0 / 3.0;
  std::vector<double> inv_diag;
};

JacobiSmoother build_jacobi(const CsrMatrix& A_gamma, double tau = 2.0 / 3.0);
void smooth(const JacobiSmoother& s, const CsrMatrix& A_gamma, std::span<double> x,
            std::span<const double> b, int steps);

/// Nodal interpolation from a coarse Qk space into the uniformly refined one.
CsrMatrix standard_prolongation(const FunctionSpace& Vc, const FunctionSpace& Vf,
                                const std::vector<std::array<int, 4>>& child_map);

/// Robust transfer: standard prolongation corrected by per-coarse-cell local
/// solves over the fine dofs supported strictly inside each coarse cell.
struct RobustTransfer {
  CsrMatrix P;  // fine x coarse
  double gamma = 0;
  std::vector<PatchSolve> cell_locals;

  std::vector<double> prolong(std::span<const double> uc, const CsrMatrix& fine_penalty,
                              bool robust) const;
  std::vector<double> restrict_to_coarse(std::span<const double> rf,
                                         const CsrMatrix& fine_penalty,
                                         bool robust) const;
};

RobustTransfer build_robust_transfer(const FunctionSpace& Vc, const FunctionSpace& Vf,
                                     const std::vector<std::array<int, 4>>& child_map,
                                     const CsrMatrix& A_gamma_fine, double gamma);

enum class SmootherKind { Star, Jacobi };
enum class TransferKind { Robust, Standard };
enum class CycleType { V, F };

struct MgOptions {
  SmootherKind smoother = SmootherKind::Star;
  TransferKind transfer = TransferKind::Robust;
  CycleType cycle = CycleType::F;
  int pre_smooth = 5, post_smooth = 5;
  double tau_star = 0.25;
  double tau_jacobi = 0.4;  // stable for the Qk stiffness spectra up to k = 5
};

using BcSetup = std::function<void(FunctionSpace&)>;

struct MgLevel {
  FunctionSpace V, Q;
  CsrMatrix A_gamma;
  CsrMatrix penalty;  // B^T W^{-1} B, drives the robust transfer correction
  SmootherPatches star;
  JacobiSmoother jacobi;
};

/// Geometric multigrid for A_gamma with rediscretized level operators.
struct MultigridHierarchy {
  MgOptions opts;
  double gamma = 0;
  std::vector<MgLevel> levels;  // coarsest first
  std::vector<RobustTransfer> transfers;  // [l]: level l -> l+1
  std::unique_ptr<BandedCholesky> coarse;

  int n_levels() const { return static_cast<int>(levels.size()); }
  const CsrMatrix& fine_matrix() const { return levels.back().A_gamma; }

  void vcycle(int level, std::span<const double> b, std::span<double> x) const;
  /// One V- or F-cycle from a zero initial guess (preconditioner application).
  void apply(std::span<const double> b, std::span<double> x) const;
  LinOp as_precond() const;
};

MultigridHierarchy build_multigrid(const MeshHierarchy& meshes, int k,
                                   const ViscosityModel& visc, double gamma, WChoice w,
                                   const BcSetup& bcs, const MgOptions& opts);

struct KernelDecompositionReport {
  int dim_kernel = 0;     // dim N_h
  int rank_patch_sum = 0; // rank of the stacked per-patch kernel bases
  bool holds = false;
};

/// Numerical check of the kernel decomposition property
/// N_h = sum_i (V_i cap N_h) via dense SVD; refuses large problems.
KernelDecompositionReport kernel_decomposition_check(const FunctionSpace& V,
                                                     const CsrMatrix& B,
                                                     const std::vector<StarPatch>& stars,
                                                     int max_dofs = 2000,
                                                     double rel_tol = 1e-8);

}  // namespace vvs
