#include "vvs/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace vvs {

namespace {

void check_size(const StokesBlocks& blocks, int max_dofs) {
  const int total = blocks.V->n_dofs + blocks.Q->n_dofs;
  if (total > max_dofs)
    throw std::invalid_argument("dense Schur analysis refused: problem too large");
}

// S_full = B A^{-1} B^T for a constrained SPD A
DenseMatrix full_schur(const CsrMatrix& A, const CsrMatrix& B) {
  const BandedCholesky chol(A);
  const int np = B.nrows, nu = B.ncols;
  DenseMatrix X(nu, np);  // A^{-1} B^T
  std::vector<double> col(nu);
  for (int j = 0; j < np; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    for (int p = B.row_ptr[j]; p < B.row_ptr[j + 1]; ++p) col[B.col_idx[p]] = B.vals[p];
    chol.solve(col);
    for (int i = 0; i < nu; ++i) X(i, j) = col[i];
  }
  DenseMatrix S = DenseMatrix::Zero(np, np);
  for (int i = 0; i < np; ++i)
    for (int p = B.row_ptr[i]; p < B.row_ptr[i + 1]; ++p)
      S.row(i) += B.vals[p] * X.row(B.col_idx[p]);
  return 0.5 * (S + S.transpose());
}

DenseVector constant_pressure_vector(const FunctionSpace& Q) {
  DenseVector c = DenseVector::Zero(Q.n_dofs);
  for (int cell = 0; cell < Q.mesh->n_cells(); ++cell) c[cell * Q.dofs_per_cell] = 1.0;
  return c;
}

// inverse form Z^T M^{-1} Z of a block-diagonal SPD matrix
DenseMatrix inverse_form(const BlockDiagMatrix& M, const DenseMatrix& Z) {
  const int n = M.n();
  DenseMatrix MZ(n, Z.cols());
  for (int j = 0; j < Z.cols(); ++j) {
    std::vector<double> x(Z.col(j).data(), Z.col(j).data() + n), y(n);
    M.apply_inverse(x, y);
    for (int i = 0; i < n; ++i) MZ(i, j) = y[i];
  }
  DenseMatrix F = Z.transpose() * MZ;
  return 0.5 * (F + F.transpose());
}

// inverse form Z^T \bar S^{-1} Z where \bar S = S + sigma c c^T regularizes the
// constant null direction; exact on the subspace spanned by Z (orthogonal to c)
DenseMatrix schur_inverse_form(const DenseMatrix& S, const DenseVector& c_or_empty,
                               const DenseMatrix& Z) {
  DenseMatrix Sbar = S;
  if (c_or_empty.size() > 0) {
    const DenseVector chat = c_or_empty / c_or_empty.norm();
    const double sigma = S.trace() / S.rows();
    Sbar += sigma * chat * chat.transpose();
  }
  Eigen::LDLT<DenseMatrix> ldlt(Sbar);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("dense Schur factorization failed");
  DenseMatrix F = Z.transpose() * ldlt.solve(DenseMatrix(Z));
  return 0.5 * (F + F.transpose());
}

}  // namespace

DenseMatrix dense_schur(const StokesBlocks& blocks, double gamma, int max_dofs) {
  check_size(blocks, max_dofs);
  const CsrMatrix Ag = gamma == blocks.gamma
                           ? blocks.A_gamma
                           : assemble_augmented(blocks.A, blocks.div_penalty, gamma);
  const DenseMatrix S = full_schur(Ag, blocks.B);
  if (!blocks.Q->mean_constraint) return S;
  // forward form on zero-mean pressure functions: basis of (M_p c)^perp
  const DenseVector c = constant_pressure_vector(*blocks.Q);
  std::vector<double> Mc_raw(blocks.Q->n_dofs);
  blocks.Mp.apply(std::span<const double>(c.data(), c.size()), Mc_raw);
  const DenseMatrix Zv =
      orthogonal_complement(Eigen::Map<DenseVector>(Mc_raw.data(), blocks.Q->n_dofs));
  DenseMatrix out = Zv.transpose() * S * Zv;
  return 0.5 * (out + out.transpose());
}

SchurForms dense_schur_forms(const StokesBlocks& blocks, int max_dofs) {
  check_size(blocks, max_dofs);
  SchurForms f;
  f.gamma = blocks.gamma;

  const int np = blocks.Q->n_dofs;
  DenseVector c;
  if (blocks.Q->mean_constraint) {
    c = constant_pressure_vector(*blocks.Q);
    f.Z = orthogonal_complement(c);
  } else {
    f.Z = DenseMatrix::Identity(np, np);
  }

  const DenseMatrix S = full_schur(blocks.A, blocks.B);
  const DenseMatrix Sg = blocks.gamma == 0.0 ? S : full_schur(blocks.A_gamma, blocks.B);
  f.S_inv = schur_inverse_form(S, c, f.Z);
  f.Sg_inv = blocks.gamma == 0.0 ? f.S_inv : schur_inverse_form(Sg, c, f.Z);
  f.Mp_inv = inverse_form(blocks.Mp, f.Z);
  f.Mpiv_inv = inverse_form(blocks.Mp_invvisc, f.Z);
  return f;
}

EquivalenceConstants measure_constants(const DenseMatrix& S_inv,
                                       const DenseMatrix& Shat_inv,
                                       const DenseMatrix& W_inv) {
  EquivalenceConstants k;
  // spectrum of the pencil (X, Y) on inverse forms equals the spectrum of the
  // forward pencil with the roles swapped
  const auto cs = generalized_sym_eig(Shat_inv, S_inv);
  k.c = cs.front();
  k.C = cs.back();
  const auto ds = generalized_sym_eig(W_inv, S_inv);
  k.d = ds.front();
  k.D = ds.back();
  const auto es = generalized_sym_eig(W_inv, Shat_inv);
  k.e = es.front();
  k.E = es.back();
  return k;
}

std::pair<double, double> spectral_bounds(const EquivalenceConstants& k, double gamma) {
  const double f1 = k.c / (1.0 + gamma * k.c * k.E) + gamma * k.d / (1.0 + gamma * k.d);
  const double f2 =
      (1.0 + gamma * k.e) / (std::max(1.0, 1.0 / k.c) + gamma * k.e);
  const double F1 = k.C / (1.0 + gamma * k.C * k.e) + gamma * k.D / (1.0 + gamma * k.D);
  const double F2 =
      (1.0 + gamma * k.e) / (std::min(1.0, 1.0 / k.C) + gamma * k.e);
  return {std::max(f1, f2), std::min(F1, F2)};
}

std::vector<BoundReport> verify_spectral_bounds(const FunctionSpace& V, const FunctionSpace& Q,
                                      const ViscosityModel& visc,
                                      const std::function<Vec2(Vec2)>& force,
                                      SchurVariant variant, WChoice w,
                                      const std::vector<double>& gammas,
                                      double bound_tol, double debug_scale,
                                      int max_dofs) {
  std::vector<BoundReport> reports;
  for (double gamma : gammas) {
    const StokesBlocks blocks = assemble_stokes(V, Q, visc, force, gamma, w);
    const SchurForms f = dense_schur_forms(blocks, max_dofs);

    // \hat S = M_p(1/mu) for both AL variants; W differs
    const DenseMatrix& Shat_inv = f.Mpiv_inv;
    const DenseMatrix& W_inv =
        variant == SchurVariant::P1 ? f.Mp_inv : f.Mpiv_inv;

    BoundReport rep;
    rep.gamma = gamma;
    rep.consts = measure_constants(f.S_inv, Shat_inv, W_inv);
    std::tie(rep.f_mu, rep.F_mu) = spectral_bounds(rep.consts, gamma);

    const DenseMatrix Shat_gamma_inv =
        (1.0 / debug_scale) * Shat_inv + gamma * W_inv;
    const auto lambdas = generalized_sym_eig(Shat_gamma_inv, f.Sg_inv);
    rep.lambda_min = lambdas.front();
    rep.lambda_max = lambdas.back();
    rep.holds = rep.lambda_min >= rep.f_mu - bound_tol &&
                rep.lambda_max <= rep.F_mu + bound_tol;
    reports.push_back(rep);
  }
  return reports;
}

ExactEigCheck exact_eigs_shat_equals_w(const SchurForms& f, double gamma) {
  ExactEigCheck check;
  // \hat S = W = M_p
  const auto nus = generalized_sym_eig(f.Mp_inv, f.S_inv);
  check.predicted.reserve(nus.size());
  for (double nu : nus) check.predicted.push_back((1.0 + gamma) / (1.0 / nu + gamma));
  std::sort(check.predicted.begin(), check.predicted.end());

  const DenseMatrix Shat_gamma_inv = (1.0 + gamma) * f.Mp_inv;
  check.measured = generalized_sym_eig(Shat_gamma_inv, f.Sg_inv);
  std::sort(check.measured.begin(), check.measured.end());

  check.max_rel_error = 0.0;
  for (std::size_t i = 0; i < check.measured.size(); ++i) {
    const double denom = std::max(1.0, std::abs(check.predicted[i]));
    check.max_rel_error = std::max(
        check.max_rel_error, std::abs(check.measured[i] - check.predicted[i]) / denom);
  }
  return check;
}

void write_bound_reports_csv(const std::vector<BoundReport>& reports,
                             SchurVariant variant, std::ostream& os) {
  os << "gamma,variant,c_mu,C_mu,d_mu,D_mu,e_mu,E_mu,f_mu,F_mu,lambda_min,lambda_max,"
        "holds\n";
  os.precision(12);
  for (const auto& r : reports) {
    os << r.gamma << "," << (variant == SchurVariant::P1 ? "P1" : "P2") << ","
       << r.consts.c << "," << r.consts.C << "," << r.consts.d << "," << r.consts.D
       << "," << r.consts.e << "," << r.consts.E << "," << r.f_mu << "," << r.F_mu
       << "," << r.lambda_min << "," << r.lambda_max << "," << (r.holds ? 1 : 0)
       << "\n";
  }
}

}  // namespace vvs
