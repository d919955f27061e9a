#include "vvs/al_precond.hpp"

#include <stdexcept>

namespace vvs {

void PressureMean::project_primal(std::span<double> z) const {
  if (!active) return;
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += Mc[i] * z[i];
  const double a = s / cMc;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] -= a * c[i];
}

void PressureMean::project_dual(std::span<double> r) const {
  if (!active) return;
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += c[i] * r[i];
  const double a = s / cMc;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= a * Mc[i];
}

double PressureMean::mean(std::span<const double> z) const {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += Mc[i] * z[i];
  return s;
}

PressureMean make_pressure_mean(const FunctionSpace& Q, const BlockDiagMatrix& Mp) {
  PressureMean m;
  m.active = Q.mean_constraint;
  m.c.assign(Q.n_dofs, 0.0);
  // the constant function 1: first modal coefficient of every cell
  for (int c = 0; c < Q.mesh->n_cells(); ++c) m.c[c * Q.dofs_per_cell] = 1.0;
  m.Mc.assign(Q.n_dofs, 0.0);
  Mp.apply(m.c, m.Mc);
  m.cMc = 0.0;
  for (int i = 0; i < Q.n_dofs; ++i) m.cMc += m.c[i] * m.Mc[i];
  return m;
}

void SchurApprox::apply_inverse(std::span<const double> r, std::span<double> z) const {
  const std::size_t n = r.size();
  std::vector<double> rp(r.begin(), r.end());
  mean.project_dual(rp);

  // \hat S_gamma^{-1} = \hat S^{-1} + gamma W^{-1} with \hat S = M_p(1/mu)
  // and W = M_p (P1) or M_p(1/mu) (P2).
  Mp_invvisc->apply_inverse(rp, z);
  for (std::size_t i = 0; i < n; ++i) z[i] /= debug_scale;
  if (gamma > 0.0) {
    std::vector<double> t(n);
    if (variant == SchurVariant::P1)
      Mp->apply_inverse(rp, t);
    else
      Mp_invvisc->apply_inverse(rp, t);
    for (std::size_t i = 0; i < n; ++i) z[i] += gamma * t[i];
  }
  mean.project_primal(z);
}

SchurApprox make_schur_approx(const StokesBlocks& blocks, SchurVariant variant) {
  SchurApprox s;
  s.variant = variant;
  s.gamma = blocks.gamma;
  s.Mp = &blocks.Mp;
  s.Mp_invvisc = &blocks.Mp_invvisc;
  s.mean = make_pressure_mean(*blocks.Q, blocks.Mp);
  return s;
}

void BlockPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const auto ru = r.subspan(0, nu);
  const auto rp = r.subspan(nu, np);
  auto zu = z.subspan(0, nu);
  auto zp = z.subspan(nu, np);

  // lower sweep: w = rp - B \hat A^{-1} ru
  std::vector<double> v(nu);
  inner_A(ru, v);
  std::vector<double> w(rp.begin(), rp.end());
  B->spmv_add(v, w, -1.0);

  // block diagonal: zp = -\hat S_gamma^{-1} w
  if (schur_override)
    schur_override(w, zp);
  else
    schur.apply_inverse(w, zp);
  for (int i = 0; i < np; ++i) zp[i] = -zp[i];

  // upper sweep: zu = \hat A^{-1} (ru - B^T zp)
  std::vector<double> t(ru.begin(), ru.end());
  Bt->spmv_add(zp, t, -1.0);
  inner_A(t, zu);
}

LinOp BlockPreconditioner::as_linop() const {
  return [this](std::span<const double> r, std::span<double> z) { apply(r, z); };
}

LinOp saddle_operator(const CsrMatrix& A_gamma, const CsrMatrix& B, const CsrMatrix& Bt) {
  const int nu = A_gamma.nrows;
  const int np = B.nrows;
  return [&A_gamma, &B, &Bt, nu, np](std::span<const double> x, std::span<double> y) {
    const auto xu = x.subspan(0, nu);
    const auto xp = x.subspan(nu, np);
    auto yu = y.subspan(0, nu);
    auto yp = y.subspan(nu, np);
    A_gamma.spmv(xu, yu);
    Bt.spmv_add(xp, yu, 1.0);
    B.spmv(xu, yp);
  };
}

}  // namespace vvs
