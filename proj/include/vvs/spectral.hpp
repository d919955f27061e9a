#pragma once

#include <iosfwd>
#include <vector>

#include "vvs/al_precond.hpp"
#include "vvs/assembly.hpp"
#include "vvs/dense.hpp"

namespace vvs {

/// Dense inverse forms on the zero-mean pressure subspace. All matrices are
/// (np-1) x (np-1) (or np x np without the mean constraint) representations
/// of S^{-1}, S_gamma^{-1}, M_p^{-1} and M_p(1/mu)^{-1} as quadratic forms on
/// residual vectors orthogonal to the constants.
struct SchurForms {
  DenseMatrix Z;  // dual-subspace basis
  DenseMatrix S_inv;
  DenseMatrix Sg_inv;
  DenseMatrix Mp_inv;
  DenseMatrix Mpiv_inv;
  double gamma = 0;
};

/// Deflated dense Schur complement S_gamma (forward form on zero-mean
/// pressure functions). Refuses problems above max_dofs total unknowns.
DenseMatrix dense_schur(const StokesBlocks& blocks, double gamma, int max_dofs = 3000);

SchurForms dense_schur_forms(const StokesBlocks& blocks, int max_dofs = 3000);

struct EquivalenceConstants {
  double c = 0, C = 0;  // \hat S vs S
  double d = 0, D = 0;  // W vs S
  double e = 0, E = 0;  // W vs \hat S
};

/// Extreme generalized eigenvalues of the three matrix pencils, computed from
/// the inverse forms.
EquivalenceConstants measure_constants(const DenseMatrix& S_inv,
                                       const DenseMatrix& Shat_inv,
                                       const DenseMatrix& W_inv);

/// Eigenvalue bounds f_mu, F_mu for the augmented Schur approximation,
/// evaluated from the measured equivalence constants.
std::pair<double, double> spectral_bounds(const EquivalenceConstants& k, double gamma);

struct BoundReport {
  double gamma = 0;
  EquivalenceConstants consts;
  double f_mu = 0, F_mu = 0;
  double lambda_min = 0, lambda_max = 0;
  bool holds = false;
};

/// Spectrum of \hat S_gamma^{-1} S_gamma against [f_mu, F_mu] for each gamma.
/// shat/w pick which mass matrix plays \hat S and W; debug_scale scales
/// \hat S (negative control).
std::vector<BoundReport> verify_spectral_bounds(const FunctionSpace& V, const FunctionSpace& Q,
                                      const ViscosityModel& visc,
                                      const std::function<Vec2(Vec2)>& force,
                                      SchurVariant variant, WChoice w,
                                      const std::vector<double>& gammas,
                                      double bound_tol = 1e-9, double debug_scale = 1.0,
                                      int max_dofs = 3000);

/// Exact eigenvalue formula for \hat S = W: measured spectrum of
/// \hat S_gamma^{-1} S_gamma and the prediction (1+gamma)/(1/nu + gamma).
struct ExactEigCheck {
  std::vector<double> measured;
  std::vector<double> predicted;
  double max_rel_error = 0;
};
ExactEigCheck exact_eigs_shat_equals_w(const SchurForms& forms, double gamma);

void write_bound_reports_csv(const std::vector<BoundReport>& reports,
                             SchurVariant variant, std::ostream& os);

}  // namespace vvs
