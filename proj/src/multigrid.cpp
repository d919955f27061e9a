#include "vvs/multigrid.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vvs {

namespace {

DenseMatrix principal_submatrix(const CsrMatrix& A, const std::vector<int>& dofs) {
  const int m = static_cast<int>(dofs.size());
  DenseMatrix S = DenseMatrix::Zero(m, m);
  std::vector<int> where(A.ncols, -1);
  for (int a = 0; a < m; ++a) where[dofs[a]] = a;
  for (int a = 0; a < m; ++a) {
    const int row = dofs[a];
    for (int p = A.row_ptr[row]; p < A.row_ptr[row + 1]; ++p) {
      const int b = where[A.col_idx[p]];
      if (b >= 0) S(a, b) = A.vals[p];
    }
  }
  return S;
}

PatchSolve make_patch_solve(const CsrMatrix& A, std::vector<int> dofs,
                            const char* what) {
  PatchSolve ps;
  ps.dofs = std::move(dofs);
  ps.chol.compute(principal_submatrix(A, ps.dofs));
  if (ps.chol.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) +
                             ": patch submatrix is not positive definite");
  return ps;
}

void apply_patch_solves(const std::vector<PatchSolve>& patches,
                        std::span<const double> r, std::span<double> out,
                        double scale) {
  DenseVector buf;
  for (const auto& ps : patches) {
    const int m = static_cast<int>(ps.dofs.size());
    buf.resize(m);
    for (int a = 0; a < m; ++a) buf[a] = r[ps.dofs[a]];
    ps.chol.solveInPlace(buf);
    for (int a = 0; a < m; ++a) out[ps.dofs[a]] += scale * buf[a];
  }
}

}  // namespace

SmootherPatches build_smoother(const CsrMatrix& A_gamma,
                               const std::vector<StarPatch>& stars, double tau) {
  SmootherPatches s;
  s.tau = tau;
  s.patches.reserve(stars.size());
  for (const auto& star : stars) {
    if (star.dofs.empty()) continue;  // nothing interior to this star
    s.patches.push_back(make_patch_solve(A_gamma, star.dofs, "smoother"));
  }
  return s;
}

void smooth(const SmootherPatches& s, const CsrMatrix& A_gamma, std::span<double> x,
            std::span<const double> b, int steps) {
  const int n = A_gamma.nrows;
  std::vector<double> r(n);
  for (int it = 0; it < steps; ++it) {
    A_gamma.spmv(x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    apply_patch_solves(s.patches, r, x, s.tau);
  }
}

JacobiSmoother build_jacobi(const CsrMatrix& A_gamma, double tau) {
  JacobiSmoother s;
  s.tau = tau;
  s.inv_diag.resize(A_gamma.nrows);
  for (int i = 0; i < A_gamma.nrows; ++i) {
    const double d = A_gamma.get(i, i);
    if (d == 0.0) throw std::runtime_error("jacobi: zero diagonal entry");
    s.inv_diag[i] = 1.0 / d;
  }
  return s;
}

void smooth(const JacobiSmoother& s, const CsrMatrix& A_gamma, std::span<double> x,
            std::span<const double> b, int steps) {
  const int n = A_gamma.nrows;
  std::vector<double> r(n);
  for (int it = 0; it < steps; ++it) {
    A_gamma.spmv(x, r);
    for (int i = 0; i < n; ++i) x[i] += s.tau * s.inv_diag[i] * (b[i] - r[i]);
  }
}

CsrMatrix standard_prolongation(const FunctionSpace& Vc, const FunctionSpace& Vf,
                                const std::vector<std::array<int, 4>>& child_map) {
  const int nb = Vc.element.n_basis;
  // child quadrant origins in coarse reference coordinates
  const Vec2 offsets[4] = {{-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}};

  TripletBuilder trip(Vf.n_dofs, Vc.n_dofs);
  std::vector<char> written(Vf.n_dofs / 2, 0);
  std::vector<double> vals(nb);

  for (std::size_t cc = 0; cc < child_map.size(); ++cc) {
    for (int q = 0; q < 4; ++q) {
      const int fc = child_map[cc][q];
      for (int l = 0; l < Vf.element.n_basis; ++l) {
        const int fnode = Vf.dof(fc, 2 * l) / 2;
        if (written[fnode]) continue;
        written[fnode] = 1;
        const Vec2 ref = Vf.element.nodes[l];
        const Vec2 coarse_ref{offsets[q].x + 0.5 * ref.x, offsets[q].y + 0.5 * ref.y};
        Vc.element.eval(coarse_ref, vals);
        for (int ml = 0; ml < nb; ++ml) {
          if (std::abs(vals[ml]) < 1e-14) continue;
          for (int comp = 0; comp < 2; ++comp) {
            const int frow = 2 * fnode + comp;
            const int gcol = Vc.dof(static_cast<int>(cc), 2 * ml + comp);
            if (Vf.is_dirichlet[frow] || Vc.is_dirichlet[gcol]) continue;
            trip.add(frow, gcol, vals[ml]);
          }
        }
      }
    }
  }
  return trip.build();
}

RobustTransfer build_robust_transfer(const FunctionSpace& Vc, const FunctionSpace& Vf,
                                     const std::vector<std::array<int, 4>>& child_map,
                                     const CsrMatrix& A_gamma_fine, double gamma) {
  RobustTransfer t;
  t.P = standard_prolongation(Vc, Vf, child_map);
  t.gamma = gamma;
  if (gamma == 0.0) return t;  // correction vanishes

  const auto supports = Vf.dof_supports();
  std::vector<int> cell_of(Vf.mesh->n_cells(), -1);
  for (std::size_t cc = 0; cc < child_map.size(); ++cc)
    for (int q = 0; q < 4; ++q) cell_of[child_map[cc][q]] = static_cast<int>(cc);

  // fine dofs supported strictly inside one coarse cell
  std::vector<std::vector<int>> interior(child_map.size());
  for (int d = 0; d < Vf.n_dofs; ++d) {
    if (Vf.is_dirichlet[d] || supports[d].empty()) continue;
    const int cc = cell_of[supports[d][0]];
    bool inside = true;
    for (int c : supports[d])
      if (cell_of[c] != cc) {
        inside = false;
        break;
      }
    // dofs on the coarse-cell boundary belong to several fine cells of
    // different parents except along the outer boundary; those are Dirichlet
    // in the full-Dirichlet case, otherwise they still qualify (supp in K)
    if (inside) interior[cc].push_back(d);
  }

  t.cell_locals.reserve(child_map.size());
  for (auto& dofs : interior) {
    if (dofs.empty()) continue;
    std::sort(dofs.begin(), dofs.end());
    t.cell_locals.push_back(make_patch_solve(A_gamma_fine, std::move(dofs), "transfer"));
  }
  return t;
}

std::vector<double> RobustTransfer::prolong(std::span<const double> uc,
                                            const CsrMatrix& fine_penalty,
                                            bool robust) const {
  std::vector<double> uf(P.nrows, 0.0);
  P.spmv(uc, uf);
  if (!robust || gamma == 0.0 || cell_locals.empty()) return uf;

  std::vector<double> g(P.nrows, 0.0);
  fine_penalty.spmv(uf, g);
  for (double& v : g) v *= gamma;
  apply_patch_solves(cell_locals, g, uf, -1.0);
  return uf;
}

std::vector<double> RobustTransfer::restrict_to_coarse(std::span<const double> rf,
                                                       const CsrMatrix& fine_penalty,
                                                       bool robust) const {
  std::vector<double> s(rf.begin(), rf.end());
  if (robust && gamma != 0.0 && !cell_locals.empty()) {
    std::vector<double> t(rf.size(), 0.0);
    apply_patch_solves(cell_locals, rf, t, 1.0);
    std::vector<double> gt(rf.size(), 0.0);
    fine_penalty.spmv(t, gt);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] -= gamma * gt[i];
  }
  std::vector<double> rc(P.ncols, 0.0);
  for (int i = 0; i < P.nrows; ++i)
    for (int p = P.row_ptr[i]; p < P.row_ptr[i + 1]; ++p)
      rc[P.col_idx[p]] += P.vals[p] * s[i];
  return rc;
}

namespace {

void level_smooth(const MgLevel& lvl, const MgOptions& opts, std::span<double> x,
                  std::span<const double> b, int steps) {
  if (opts.smoother == SmootherKind::Star)
    smooth(lvl.star, lvl.A_gamma, x, b, steps);
  else
    smooth(lvl.jacobi, lvl.A_gamma, x, b, steps);
}

}  // namespace

void MultigridHierarchy::vcycle(int level, std::span<const double> b,
                                std::span<double> x) const {
  if (level == 0) {
    std::copy(b.begin(), b.end(), x.begin());
    coarse->solve(x);
    return;
  }
  const MgLevel& lvl = levels[level];
  const bool robust = opts.transfer == TransferKind::Robust;
  const int n = lvl.A_gamma.nrows;

  level_smooth(lvl, opts, x, b, opts.pre_smooth);

  std::vector<double> r(n);
  lvl.A_gamma.spmv(x, r);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];

  const auto rc = transfers[level - 1].restrict_to_coarse(r, lvl.penalty, robust);
  std::vector<double> ec(rc.size(), 0.0);
  vcycle(level - 1, rc, ec);
  const auto ef = transfers[level - 1].prolong(ec, lvl.penalty, robust);
  for (int i = 0; i < n; ++i) x[i] += ef[i];

  level_smooth(lvl, opts, x, b, opts.post_smooth);
}

void MultigridHierarchy::apply(std::span<const double> b, std::span<double> x) const {
  const int L = n_levels();
  std::fill(x.begin(), x.end(), 0.0);
  if (opts.cycle == CycleType::V || L == 1) {
    vcycle(L - 1, b, x);
    return;
  }
  // F-cycle: restrict the rhs to every level, solve on the coarsest, then
  // interpolate upwards running a V-cycle on each level.
  const bool robust = opts.transfer == TransferKind::Robust;
  std::vector<std::vector<double>> bs(L);
  bs[L - 1].assign(b.begin(), b.end());
  for (int l = L - 1; l > 0; --l)
    bs[l - 1] = transfers[l - 1].restrict_to_coarse(bs[l], levels[l].penalty, robust);

  std::vector<double> xl = bs[0];
  coarse->solve(xl);
  for (int l = 1; l < L; ++l) {
    std::vector<double> xf = transfers[l - 1].prolong(xl, levels[l].penalty, robust);
    vcycle(l, bs[l], xf);
    xl = std::move(xf);
  }
  std::copy(xl.begin(), xl.end(), x.begin());
}

LinOp MultigridHierarchy::as_precond() const {
  return [this](std::span<const double> b, std::span<double> x) { apply(b, x); };
}

MultigridHierarchy build_multigrid(const MeshHierarchy& meshes, int k,
                                   const ViscosityModel& visc, double gamma, WChoice w,
                                   const BcSetup& bcs, const MgOptions& opts) {
  MultigridHierarchy h;
  h.opts = opts;
  h.gamma = gamma;
  h.levels.reserve(meshes.n_levels());

  for (int l = 0; l < meshes.n_levels(); ++l) {
    MgLevel lvl;
    lvl.V = make_velocity_space(meshes.levels[l], k);
    if (bcs) bcs(lvl.V);
    lvl.Q = make_pressure_space(meshes.levels[l], k);

    CsrMatrix A = assemble_viscous_block(lvl.V, visc);
    CsrMatrix B = assemble_divergence(lvl.V, lvl.Q);
    symmetric_dirichlet_eliminate(A, lvl.V);
    eliminate_dirichlet_columns(B, lvl.V);
    const BlockDiagMatrix W =
        assemble_pressure_mass(lvl.Q, w == WChoice::MpInvVisc ? &visc : nullptr);
    lvl.penalty = assemble_div_penalty(B, W, lvl.Q);
    lvl.A_gamma = assemble_augmented(A, lvl.penalty, gamma);

    if (opts.smoother == SmootherKind::Star) {
      const auto stars = vertex_stars(meshes.levels[l], lvl.V);
      lvl.star = build_smoother(lvl.A_gamma, stars, opts.tau_star);
    } else {
      lvl.jacobi = build_jacobi(lvl.A_gamma, opts.tau_jacobi);
    }
    h.levels.push_back(std::move(lvl));
  }

  h.coarse = std::make_unique<BandedCholesky>(h.levels[0].A_gamma);

  for (int l = 0; l + 1 < meshes.n_levels(); ++l) {
    const double tgamma = opts.transfer == TransferKind::Robust ? gamma : 0.0;
    h.transfers.push_back(build_robust_transfer(h.levels[l].V, h.levels[l + 1].V,
                                                meshes.child_maps[l],
                                                h.levels[l + 1].A_gamma, tgamma));
  }
  return h;
}

KernelDecompositionReport kernel_decomposition_check(const FunctionSpace& V,
                                                     const CsrMatrix& B,
                                                     const std::vector<StarPatch>& stars,
                                                     int max_dofs, double rel_tol) {
  std::vector<int> free_index(V.n_dofs, -1);
  int n_free = 0;
  for (int d = 0; d < V.n_dofs; ++d)
    if (!V.is_dirichlet[d]) free_index[d] = n_free++;
  if (n_free > max_dofs)
    throw std::invalid_argument("kernel decomposition check: problem too large");

  DenseMatrix Bfree = DenseMatrix::Zero(B.nrows, n_free);
  for (int i = 0; i < B.nrows; ++i)
    for (int p = B.row_ptr[i]; p < B.row_ptr[i + 1]; ++p)
      if (free_index[B.col_idx[p]] >= 0)
        Bfree(i, free_index[B.col_idx[p]]) = B.vals[p];

  KernelDecompositionReport rep;
  rep.dim_kernel = n_free - numeric_rank(Bfree, rel_tol);

  // per-patch kernels, embedded into the free dof numbering and stacked
  std::vector<DenseMatrix> pieces;
  int total_cols = 0;
  for (const auto& star : stars) {
    if (star.dofs.empty()) continue;
    const int m = static_cast<int>(star.dofs.size());
    DenseMatrix Bp(B.nrows, m);
    for (int a = 0; a < m; ++a) Bp.col(a) = Bfree.col(free_index[star.dofs[a]]);
    DenseMatrix N = null_space_basis(Bp, rel_tol);
    if (N.cols() == 0) continue;
    DenseMatrix embedded = DenseMatrix::Zero(n_free, N.cols());
    for (int a = 0; a < m; ++a) embedded.row(free_index[star.dofs[a]]) = N.row(a);
    total_cols += static_cast<int>(N.cols());
    pieces.push_back(std::move(embedded));
  }
  DenseMatrix stacked = DenseMatrix::Zero(n_free, total_cols);
  int at = 0;
  for (const auto& p : pieces) {
    stacked.middleCols(at, p.cols()) = p;
    at += static_cast<int>(p.cols());
  }
  rep.rank_patch_sum = numeric_rank(stacked, rel_tol);
  rep.holds = rep.rank_patch_sum == rep.dim_kernel;
  return rep;
}

}  // namespace vvs
