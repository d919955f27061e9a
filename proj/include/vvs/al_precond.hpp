#pragma once

#include <span>
#include <vector>

#include "vvs/assembly.hpp"
#include "vvs/krylov.hpp"

namespace vvs {

/// Zero-mean projections for L^2_0 pressure spaces. Primal vectors are
/// pressure coefficient vectors, dual vectors are residuals/functionals.
struct PressureMean {
  bool active = false;
  std::vector<double> c;   // coefficients of the constant function 1
  std::vector<double> Mc;  // M_p c
  double cMc = 0;

  void project_primal(std::span<double> z) const;
  void project_dual(std::span<double> r) const;
  /// Integral of the pressure function represented by a primal vector.
  double mean(std::span<const double> z) const;
};

PressureMean make_pressure_mean(const FunctionSpace& Q, const BlockDiagMatrix& Mp);

enum class SchurVariant { P1, P2 };

/// AL Schur complement approximation:
///   P1: \hat S_gamma^{-1} = M_p(1/mu)^{-1} + gamma M_p^{-1}
///   P2: \hat S_gamma^{-1} = (1 + gamma) M_p(1/mu)^{-1}
struct SchurApprox {
  SchurVariant variant = SchurVariant::P1;
  double gamma = 0;
  const BlockDiagMatrix* Mp = nullptr;
  const BlockDiagMatrix* Mp_invvisc = nullptr;
  PressureMean mean;
  double debug_scale = 1.0;  // scales \hat S; negative-control knob

  void apply_inverse(std::span<const double> r, std::span<double> z) const;
};

SchurApprox make_schur_approx(const StokesBlocks& blocks, SchurVariant variant);

/// Full factored block preconditioner: lower-triangular sweep, block diagonal
/// (\hat A_gamma^{-1}, -\hat S_gamma^{-1}), upper-triangular sweep.
struct BlockPreconditioner {
  int nu = 0, np = 0;
  LinOp inner_A;  // application of \hat A_gamma^{-1}
  const CsrMatrix* B = nullptr;
  const CsrMatrix* Bt = nullptr;
  SchurApprox schur;
  LinOp schur_override;  // replaces schur when set (e.g. exact dense S_gamma^{-1})

  void apply(std::span<const double> r, std::span<double> z) const;
  LinOp as_linop() const;
};

/// The augmented saddle-point operator [A_gamma, B^T; B, 0] on stacked (u; p).
LinOp saddle_operator(const CsrMatrix& A_gamma, const CsrMatrix& B, const CsrMatrix& Bt);

}  // namespace vvs
