#include "vvs/problems.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "vvs/krylov.hpp"

namespace vvs {

namespace {

// splitmix64; used instead of <random> engines so that sinker placement is
// bit-identical across platforms
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace

std::vector<Vec2> place_sinkers(int n, double omega, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need at least one sinker");
  SplitMix64 rng{seed};
  std::vector<Vec2> centers(n);
  for (auto& c : centers) {
    c.x = omega + rng.uniform() * (1.0 - 2.0 * omega);
    c.y = omega + rng.uniform() * (1.0 - 2.0 * omega);
  }
  return centers;
}

double sinker_chi(const SinkerConfig& cfg, Vec2 x) {
  double chi = 1.0;
  for (const Vec2& c : cfg.centers) {
    const double d = std::max(0.0, norm(c - x) - 0.5 * cfg.omega);
    chi *= 1.0 - std::exp(-cfg.delta * d);
  }
  return chi;
}

double sinker_viscosity(const SinkerConfig& cfg, Vec2 x) {
  // +mu_min so that mu ranges over [mu_min, mu_max]
  return (cfg.mu_max() - cfg.mu_min()) * (1.0 - sinker_chi(cfg, x)) + cfg.mu_min();
}

Vec2 sinker_rhs(const SinkerConfig& cfg, Vec2 x) {
  return {0.0, cfg.beta * (sinker_chi(cfg, x) - 1.0)};
}

SinkerViscosity::SinkerViscosity(SinkerConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.centers.empty())
    cfg_.centers = place_sinkers(cfg_.n, cfg_.omega, cfg_.seed);
}

ViscositySample SinkerViscosity::sample(Vec2 x) const {
  return {.mu = sinker_viscosity(cfg_, x)};
}

std::vector<double> ViscoplasticConfig::coarse_xs() const {
  return {0.0, 0.5, 1.0, 1.4, 1.7, 1.85, notch.x0, notch.x1,
          2.15, 2.3,  2.6, 3.0, 3.5, Lx};
}

std::vector<double> ViscoplasticConfig::coarse_zs() const {
  return {0.0, 0.05, notch.y1, 0.2, 0.35, 0.55, layer_top, Lz};
}

double viscoplastic_effective_viscosity(const ViscoplasticConfig& cfg, Vec2 x,
                                        double strain_invariant) {
  double mu;
  if (cfg.in_notch(x))
    mu = cfg.mu_notch;
  else if (cfg.in_upper_layer(x))
    mu = cfg.mu_upper;
  else
    mu = 2.0 * cfg.eta_r * cfg.tau_y / (2.0 * cfg.eta_r * strain_invariant + cfg.tau_y);
  return std::max(mu, cfg.eta_floor);
}

BcSetup viscoplastic_bcs(const ViscoplasticConfig& cfg) {
  const double u0 = cfg.u0;
  return [u0](FunctionSpace& V) {
    set_dirichlet_component_on_side(V, Side::Left, 0,
                                    [u0](Vec2 p) { return u0 * (1.0 + p.y); });
    set_dirichlet_component_on_side(V, Side::Right, 0,
                                    [u0](Vec2 p) { return -u0 * (1.0 + p.y); });
    set_dirichlet_component_on_side(V, Side::Bottom, 1, [](Vec2) { return 0.0; });
  };
}

namespace {

struct StrainState {
  double exx = 0, eyy = 0, exy = 0;
  double II_raw = 0;
};

StrainState strain_at(const FunctionSpace& V, std::span<const double> u, Vec2 x) {
  const int cell = V.mesh->locate_cell(x);
  const Vec2 xhat = V.mesh->maps[cell].apply_inverse(x);
  const VelocityDeriv d = evaluate_velocity(V, u, cell, xhat);
  StrainState s;
  s.exx = d.du_dx;
  s.eyy = d.dv_dy;
  s.exy = 0.5 * (d.du_dy + d.dv_dx);
  s.II_raw = std::sqrt(0.5 * (s.exx * s.exx + s.eyy * s.eyy + 2.0 * s.exy * s.exy));
  return s;
}

}  // namespace

ViscoplasticPicard::ViscoplasticPicard(const ViscoplasticConfig& cfg,
                                       const FunctionSpace* V, std::vector<double> state)
    : cfg_(cfg), V_(V), state_(std::move(state)) {}

ViscositySample ViscoplasticPicard::sample(Vec2 x) const {
  double II = 0.0;
  if (V_ && !state_.empty()) II = strain_at(*V_, state_, x).II_raw;
  return {.mu = viscoplastic_effective_viscosity(cfg_, x, II)};
}

ViscoplasticNewton::ViscoplasticNewton(const ViscoplasticConfig& cfg,
                                       const FunctionSpace& V, std::vector<double> state)
    : cfg_(cfg), V_(&V), state_(std::move(state)) {}

ViscositySample ViscoplasticNewton::sample(Vec2 x) const {
  // constant-viscosity regions linearize to themselves
  if (cfg_.in_notch(x) || cfg_.in_upper_layer(x))
    return {.mu = viscoplastic_effective_viscosity(cfg_, x, 0.0)};

  const StrainState s = strain_at(*V_, state_, x);
  const double mu = viscoplastic_effective_viscosity(cfg_, x, s.II_raw);
  if (s.II_raw <= cfg_.strain_floor || mu <= cfg_.eta_floor) return {.mu = mu};

  // stress variable tau = mu eps(u), projected onto II_tau <= tau_y. With
  // this magnitude the bracket reproduces the exact Jacobian of the
  // composite law (the projection never activates: mu II < tau_y identically)
  double txx = mu * s.exx, tyy = mu * s.eyy, txy = mu * s.exy;
  double II_tau = mu * s.II_raw;
  if (II_tau > cfg_.tau_y) {
    const double f = cfg_.tau_y / II_tau;
    txx *= f;
    tyy *= f;
    txy *= f;
    II_tau = cfg_.tau_y;
  }
  const double II_floored = std::max(s.II_raw, cfg_.strain_floor);
  ViscositySample out;
  out.mu = mu;
  out.anisotropic = true;
  out.exx = s.exx;
  out.eyy = s.eyy;
  out.exy = s.exy;
  out.txx = txx;
  out.tyy = tyy;
  out.txy = txy;
  out.scale = 1.0 / (2.0 * II_floored * std::max(cfg_.tau_y, II_tau));
  return out;
}

namespace {

std::vector<double> zero_force_vector(const FunctionSpace& V) {
  return std::vector<double>(V.n_dofs, 0.0);
}

// nonlinear residual on the free dofs:  F_u = a(u;u,.) + B^T p,  F_p = B u
struct NonlinearResidual {
  std::vector<double> Fu, Fp;
  double norm = 0;
};

NonlinearResidual nonlinear_residual(const FunctionSpace& V, const FunctionSpace& Q,
                                     const CsrMatrix& B_raw,
                                     const ViscosityModel& state_visc,
                                     std::span<const double> u,
                                     std::span<const double> p) {
  NonlinearResidual r;
  r.Fu = viscous_residual(V, state_visc, u);
  for (int i = 0; i < B_raw.nrows; ++i)
    for (int q = B_raw.row_ptr[i]; q < B_raw.row_ptr[i + 1]; ++q)
      r.Fu[B_raw.col_idx[q]] += B_raw.vals[q] * p[i];
  for (int d = 0; d < V.n_dofs; ++d)
    if (V.is_dirichlet[d]) r.Fu[d] = 0.0;
  r.Fp.assign(Q.n_dofs, 0.0);
  B_raw.spmv(u, r.Fp);
  double s = 0.0;
  for (double v : r.Fu) s += v * v;
  for (double v : r.Fp) s += v * v;
  r.norm = std::sqrt(s);
  return r;
}

}  // namespace

NewtonResult newton_solve(const ViscoplasticConfig& cfg, const MeshHierarchy& meshes,
                          int k, const NewtonOptions& opts) {
  const Mesh& mesh = meshes.finest();
  FunctionSpace V = make_velocity_space(mesh, k);
  viscoplastic_bcs(cfg)(V);
  FunctionSpace Q = make_pressure_space(mesh, k);
  Q.mean_constraint = false;  // the open top fixes the pressure level

  CsrMatrix B_raw = assemble_divergence(V, Q);

  const BcSetup bcs = viscoplastic_bcs(cfg);
  NewtonResult result;

  auto solve_linearized = [&](const ViscosityModel& model,
                              std::span<const double> rhs_u,
                              std::span<const double> rhs_p, SolveReport& rep) {
    StokesBlocks blocks;  // pieces assembled against the given model
    CsrMatrix A0 = assemble_viscous_block(V, model);
    CsrMatrix B0 = B_raw;
    symmetric_dirichlet_eliminate(A0, V);
    eliminate_dirichlet_columns(B0, V);
    blocks.V = &V;
    blocks.Q = &Q;
    blocks.gamma = opts.gamma;
    blocks.w_choice = opts.w;
    blocks.A = std::move(A0);
    blocks.B = std::move(B0);
    blocks.Bt = blocks.B.transposed();
    blocks.Mp = assemble_pressure_mass(Q);
    blocks.Mp_invvisc = assemble_pressure_mass(Q, &model);
    blocks.div_penalty = assemble_div_penalty(blocks.B, blocks.W(), Q);
    blocks.A_gamma = assemble_augmented(blocks.A, blocks.div_penalty, opts.gamma);

    MultigridHierarchy mg =
        build_multigrid(meshes, k, model, opts.gamma, opts.w, bcs, opts.mg);

    BlockPreconditioner P;
    P.nu = V.n_dofs;
    P.np = Q.n_dofs;
    P.inner_A = mg.as_precond();
    P.B = &blocks.B;
    P.Bt = &blocks.Bt;
    P.schur = make_schur_approx(blocks, opts.variant);

    const auto rhs_aug =
        augmented_rhs(rhs_u, rhs_p, blocks.B, blocks.W(), opts.gamma);
    std::vector<double> rhs(V.n_dofs + Q.n_dofs, 0.0);
    std::copy(rhs_aug.begin(), rhs_aug.end(), rhs.begin());
    std::copy(rhs_p.begin(), rhs_p.end(), rhs.begin() + V.n_dofs);

    std::vector<double> x(V.n_dofs + Q.n_dofs, 0.0);
    const LinOp op = saddle_operator(blocks.A_gamma, blocks.B, blocks.Bt);
    const LinOp pre = P.as_linop();
    FgmresOptions fopts;
    fopts.rtol = opts.lin_rtol;
    fopts.maxit = opts.lin_maxit;
    rep = fgmres(V.n_dofs + Q.n_dofs, op, &pre, rhs, x, fopts);
    return x;
  };

  // initial iterate: one Picard solve at the zero-strain viscosity
  std::vector<double> u(V.n_dofs, 0.0), p(Q.n_dofs, 0.0);
  {
    const ViscoplasticPicard picard(cfg, nullptr, {});
    std::vector<double> uD(V.n_dofs, 0.0);
    for (int d = 0; d < V.n_dofs; ++d)
      if (V.is_dirichlet[d]) uD[d] = V.dirichlet_value[d];

    // the convergence reference is the residual of the lifted boundary data
    {
      const ViscoplasticPicard lift_model(cfg, &V, uD);
      result.initial_residual =
          nonlinear_residual(V, Q, B_raw, lift_model, uD, p).norm;
    }
    std::vector<double> r1 = zero_force_vector(V);
    CsrMatrix A0 = assemble_viscous_block(V, picard);
    A0.spmv_add(uD, r1, -1.0);
    for (int d = 0; d < V.n_dofs; ++d)
      if (V.is_dirichlet[d]) r1[d] = 0.0;
    std::vector<double> r2(Q.n_dofs, 0.0);
    B_raw.spmv_add(uD, r2, -1.0);

    NewtonStepReport step;
    step.step = 0;
    const auto x = solve_linearized(picard, r1, r2, step.linear);
    for (int d = 0; d < V.n_dofs; ++d) u[d] = uD[d] + x[d];
    for (int i = 0; i < Q.n_dofs; ++i) p[i] = x[V.n_dofs + i];
    result.steps.push_back(std::move(step));
  }

  auto state_model = [&](const std::vector<double>& state)
      -> std::unique_ptr<ViscosityModel> {
    if (opts.linear_rheology)
      return std::make_unique<ViscoplasticPicard>(cfg, nullptr, std::vector<double>{});
    return std::make_unique<ViscoplasticNewton>(cfg, V, state);
  };

  auto scalar_model = [&](const std::vector<double>& state)
      -> std::unique_ptr<ViscosityModel> {
    if (opts.linear_rheology)
      return std::make_unique<ViscoplasticPicard>(cfg, nullptr, std::vector<double>{});
    return std::make_unique<ViscoplasticPicard>(cfg, &V, state);
  };

  auto res0_model = scalar_model(u);
  NonlinearResidual res = nonlinear_residual(V, Q, B_raw, *res0_model, u, p);
  result.steps.back().residual_norm = res.norm;
  if (result.initial_residual == 0.0) result.initial_residual = std::max(res.norm, 1.0);

  for (int step = 1; step <= opts.maxit; ++step) {
    if (res.norm <= opts.rtol * result.initial_residual) {
      result.converged = true;
      break;
    }
    const auto model = state_model(u);

    std::vector<double> r1(V.n_dofs), r2(Q.n_dofs);
    for (int d = 0; d < V.n_dofs; ++d) r1[d] = -res.Fu[d];
    for (int i = 0; i < Q.n_dofs; ++i) r2[i] = -res.Fp[i];

    NewtonStepReport srep;
    srep.step = step;
    const auto x = solve_linearized(*model, r1, r2, srep.linear);

    // backtracking on the nonlinear residual norm
    double alpha = 1.0;
    std::vector<double> u_try(V.n_dofs), p_try(Q.n_dofs);
    NonlinearResidual res_try;
    bool accepted = false;
    for (int half = 0; half <= 8; ++half) {
      for (int d = 0; d < V.n_dofs; ++d) u_try[d] = u[d] + alpha * x[d];
      for (int i = 0; i < Q.n_dofs; ++i) p_try[i] = p[i] + alpha * x[V.n_dofs + i];
      const auto try_model = scalar_model(u_try);
      res_try = nonlinear_residual(V, Q, B_raw, *try_model, u_try, p_try);
      if (res_try.norm < res.norm) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    // accept the last trial even without descent; the next linearization
    // re-evaluates everything
    u = u_try;
    p = p_try;
    res = res_try;
    srep.alpha = alpha;
    srep.residual_norm = res.norm;
    result.steps.push_back(std::move(srep));
    if (!accepted && opts.linear_rheology) break;
    if (res.norm <= opts.rtol * result.initial_residual) {
      result.converged = true;
      break;
    }
  }
  result.u = std::move(u);
  result.p = std::move(p);
  return result;
}

void write_fields_csv(const ViscoplasticConfig& cfg, const FunctionSpace& V,
                      const FunctionSpace& Q, std::span<const double> u,
                      std::span<const double> p, std::ostream& os) {
  const Mesh& mesh = *V.mesh;
  os << "x,y,mu_eff,II,u,v,p\n";
  std::vector<double> qvals(Q.element.n_basis);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Vec2 x = mesh.maps[c].apply({0.0, 0.0});
    const VelocityDeriv d = evaluate_velocity(V, u, c, {0.0, 0.0});
    const double exx = d.du_dx, eyy = d.dv_dy, exy = 0.5 * (d.du_dy + d.dv_dx);
    const double II = std::sqrt(0.5 * (exx * exx + eyy * eyy + 2.0 * exy * exy));
    Q.element.eval({0.0, 0.0}, qvals);
    double pc = 0.0;
    for (int a = 0; a < Q.element.n_basis; ++a) pc += qvals[a] * p[Q.dof(c, a)];
    os << x.x << "," << x.y << "," << viscoplastic_effective_viscosity(cfg, x, II)
       << "," << II << "," << d.value.x << "," << d.value.y << "," << pc << "\n";
  }
}

}  // namespace vvs
