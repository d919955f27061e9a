#include "vvs/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>

#include "vvs/problems.hpp"
#include "vvs/spectral.hpp"

namespace vvs {

namespace {

int sinker_count(const ExperimentConfig& cfg) {
  if (cfg.sinker_n > 0) return cfg.sinker_n;
  return (cfg.nx >= 32 && cfg.ny >= 32) ? 24 : 8;
}

SinkerConfig sinker_config(const ExperimentConfig& cfg, double dr) {
  SinkerConfig sc;
  sc.n = sinker_count(cfg);
  sc.omega = cfg.sinker_omega;
  sc.delta = cfg.sinker_delta;
  sc.beta = cfg.sinker_beta;
  sc.dr = dr;
  sc.seed = cfg.seed;
  return sc;
}

std::unique_ptr<ViscosityModel> make_model(const ExperimentConfig& cfg, double dr) {
  if (cfg.problem == ProblemKind::Sinker)
    return std::make_unique<SinkerViscosity>(sinker_config(cfg, dr));
  return std::make_unique<ConstantViscosity>(cfg.const_mu);
}

std::function<Vec2(Vec2)> make_force(const ExperimentConfig& cfg, double dr) {
  if (cfg.problem == ProblemKind::Sinker) {
    auto model = std::make_shared<SinkerViscosity>(sinker_config(cfg, dr));
    return [model](Vec2 x) { return sinker_rhs(model->config(), x); };
  }
  return [](Vec2) { return Vec2{0.0, -1.0}; };
}

void dump_run(const ExperimentConfig& cfg, const StokesBlocks& blocks, double gamma,
              double dr) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.dump_dir);
  std::ostringstream tag;
  tag << "_g" << gamma << "_dr" << dr;
  auto write = [&](const std::string& name, const CsrMatrix& M) {
    std::ofstream os(fs::path(cfg.dump_dir) / (name + tag.str() + ".mtx"));
    write_matrix_market(M, os);
  };
  write("A", blocks.A);
  write("B", blocks.B);
  write("Agamma", blocks.A_gamma);
  write("Mp", blocks.Mp.to_csr());
  write("MpInvVisc", blocks.Mp_invvisc.to_csr());
  {
    std::ofstream os(fs::path(cfg.dump_dir) / ("rhs_u" + tag.str() + ".mtx"));
    write_matrix_market_vector(blocks.rhs_u_aug, os);
  }
  {
    std::ofstream os(fs::path(cfg.dump_dir) / ("rhs_p" + tag.str() + ".mtx"));
    write_matrix_market_vector(blocks.rhs_p, os);
  }
  {
    std::ofstream os(fs::path(cfg.dump_dir) / "mesh.txt");
    dump_mesh(*blocks.V->mesh, os);
  }
}

TableRow run_one(const ExperimentConfig& cfg, const MeshHierarchy& meshes, double gamma,
                 double dr) {
  const Mesh& mesh = meshes.finest();
  FunctionSpace V = make_velocity_space(mesh, cfg.k);
  set_dirichlet_all_boundary(V, [](Vec2) { return Vec2{0, 0}; });
  FunctionSpace Q = make_pressure_space(mesh, cfg.k);

  const auto model = make_model(cfg, dr);
  const auto force = make_force(cfg, dr);
  const StokesBlocks blocks = assemble_stokes(V, Q, *model, force, gamma, cfg.w);
  if (!cfg.dump_dir.empty()) dump_run(cfg, blocks, gamma, dr);

  const BcSetup bcs = [](FunctionSpace& Vl) {
    set_dirichlet_all_boundary(Vl, [](Vec2) { return Vec2{0, 0}; });
  };

  std::unique_ptr<MultigridHierarchy> mg;
  std::unique_ptr<BandedCholesky> lu;
  LinOp inner;
  if (cfg.inner == InnerSolver::Lu) {
    lu = std::make_unique<BandedCholesky>(blocks.A_gamma);
    inner = [&lu](std::span<const double> b, std::span<double> x) {
      std::copy(b.begin(), b.end(), x.begin());
      lu->solve(x);
    };
  } else {
    mg = std::make_unique<MultigridHierarchy>(
        build_multigrid(meshes, cfg.k, *model, gamma, cfg.w, bcs, cfg.mg_options()));
    inner = mg->as_precond();
  }

  FgmresOptions fopts;
  fopts.rtol = cfg.rtol;
  fopts.maxit = cfg.maxit;

  TableRow row;
  row.gamma = gamma;
  row.dr = dr;
  row.variant = cfg.variant == SchurVariant::P1 ? "P1" : "P2";
  row.w = cfg.w == WChoice::Mp ? "Mp" : "MpInvVisc";
  row.smoother = cfg.inner == InnerSolver::Lu ? "exact"
                 : cfg.smoother == SmootherKind::Star ? "robust"
                                                      : "jacobi";
  row.transfer = cfg.inner == InnerSolver::Lu ? "exact"
                 : cfg.transfer == TransferKind::Robust ? "robust"
                                                        : "standard";
  row.inner = cfg.inner == InnerSolver::Lu ? "lu" : "mg";

  SolveReport rep;
  if (cfg.system == SystemKind::TopLeft) {
    row.dofs = V.n_dofs;
    std::vector<double> x(V.n_dofs, 0.0);
    const LinOp op = [&blocks](std::span<const double> in, std::span<double> out) {
      blocks.A_gamma.spmv(in, out);
    };
    rep = fgmres(V.n_dofs, op, &inner, blocks.rhs_u_aug, x, fopts);
  } else {
    row.dofs = V.n_dofs + Q.n_dofs;
    BlockPreconditioner P;
    P.nu = V.n_dofs;
    P.np = Q.n_dofs;
    P.inner_A = inner;
    P.B = &blocks.B;
    P.Bt = &blocks.Bt;
    P.schur = make_schur_approx(blocks, cfg.variant);

    std::vector<double> rhs(V.n_dofs + Q.n_dofs, 0.0);
    std::copy(blocks.rhs_u_aug.begin(), blocks.rhs_u_aug.end(), rhs.begin());
    std::copy(blocks.rhs_p.begin(), blocks.rhs_p.end(), rhs.begin() + V.n_dofs);
    std::vector<double> x(rhs.size(), 0.0);
    const LinOp op = saddle_operator(blocks.A_gamma, blocks.B, blocks.Bt);
    const LinOp pre = P.as_linop();
    rep = fgmres(static_cast<int>(rhs.size()), op, &pre, rhs, x, fopts);
  }
  row.iterations = rep.iterations;
  row.converged = rep.converged;
  row.wall_seconds = rep.wall_seconds;
  return row;
}

}  // namespace

TableResult run_table(const ExperimentConfig& cfg) {
  if (cfg.problem == ProblemKind::Viscoplastic)
    throw std::invalid_argument("table runs use the linear problems; see `nonlinear`");
  const Rect unit{0, 0, 1, 1};
  const MeshHierarchy meshes =
      build_hierarchy(build_rect_mesh(unit, cfg.nx, cfg.ny), cfg.levels);

  std::vector<std::pair<double, double>> runs;
  for (double gamma : cfg.gammas)
    for (double dr : cfg.drs) runs.push_back({gamma, dr});

  TableResult result;
  result.rows.resize(runs.size());
  if (cfg.threads > 1) {
    std::vector<std::future<TableRow>> futs(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i)
      futs[i] = std::async(std::launch::async, [&, i] {
        return run_one(cfg, meshes, runs[i].first, runs[i].second);
      });
    for (std::size_t i = 0; i < runs.size(); ++i) result.rows[i] = futs[i].get();
  } else {
    for (std::size_t i = 0; i < runs.size(); ++i)
      result.rows[i] = run_one(cfg, meshes, runs[i].first, runs[i].second);
  }
  return result;
}

void write_table_csv(const TableResult& t, std::ostream& os) {
  os << "gamma,dr,variant,w,smoother,transfer,inner,dofs,iterations,converged,"
        "wall_seconds\n";
  for (const auto& r : t.rows)
    os << r.gamma << "," << r.dr << "," << r.variant << "," << r.w << "," << r.smoother
       << "," << r.transfer << "," << r.inner << "," << r.dofs << "," << r.iterations
       << "," << (r.converged ? 1 : 0) << "," << r.wall_seconds << "\n";
}

void print_table(const TableResult& t, std::ostream& os) {
  os << std::left << std::setw(10) << "gamma" << std::setw(10) << "DR" << std::setw(8)
     << "prec" << std::setw(11) << "W" << std::setw(9) << "smoother" << std::setw(10)
     << "transfer" << std::setw(9) << "dofs" << std::setw(7) << "iters" << "conv\n";
  for (const auto& r : t.rows)
    os << std::left << std::setw(10) << r.gamma << std::setw(10) << r.dr << std::setw(8)
       << r.variant << std::setw(11) << r.w << std::setw(9) << r.smoother
       << std::setw(10) << r.transfer << std::setw(9) << r.dofs << std::setw(7)
       << (r.converged ? std::to_string(r.iterations) : "-")
       << (r.converged ? "yes" : "no") << "\n";
}

VerifyResult run_verify(const ExperimentConfig& cfg) {
  const Rect unit{0, 0, 1, 1};
  const Mesh mesh = build_rect_mesh(unit, cfg.nx, cfg.ny);
  FunctionSpace V = make_velocity_space(mesh, cfg.k);
  set_dirichlet_all_boundary(V, [](Vec2) { return Vec2{0, 0}; });
  FunctionSpace Q = make_pressure_space(mesh, cfg.k);

  const double dr = cfg.drs.front();
  const auto model = make_model(cfg, dr);
  const auto force = make_force(cfg, dr);

  VerifyResult out;
  out.reports = verify_spectral_bounds(V, Q, *model, force, cfg.variant, cfg.w, cfg.gammas,
                             cfg.verify_tol, cfg.debug_scale_shat, cfg.verify_max_dofs);
  out.all_hold = true;
  for (const auto& r : out.reports) out.all_hold = out.all_hold && r.holds;
  return out;
}

NonlinearResult run_nonlinear(const ExperimentConfig& cfg) {
  if (cfg.problem != ProblemKind::Viscoplastic)
    throw std::invalid_argument("nonlinear runs need `problem = viscoplastic`");
  ViscoplasticConfig vp;
  vp.tau_y = cfg.tau_y;
  const MeshHierarchy meshes = build_hierarchy(
      build_tensor_mesh(vp.coarse_xs(), vp.coarse_zs()), cfg.levels);

  NonlinearResult out;
  for (double gamma : cfg.gammas) {
    NewtonOptions opts;
    opts.gamma = gamma;
    opts.variant = cfg.variant;
    opts.w = cfg.w;
    opts.lin_rtol = cfg.rtol;
    opts.lin_maxit = cfg.maxit;
    opts.rtol = cfg.newton_rtol;
    opts.maxit = cfg.newton_maxit;
    opts.mg = cfg.mg_options();
    opts.linear_rheology = cfg.linear_rheology;

    const NewtonResult res = newton_solve(vp, meshes, cfg.k, opts);
    double sum = 0;
    for (const auto& s : res.steps) {
      NonlinearResult::Row row;
      row.gamma = gamma;
      row.step = s.step;
      row.linear_iterations = s.linear.iterations;
      row.linear_converged = s.linear.converged;
      row.residual = s.residual_norm;
      out.rows.push_back(row);
      sum += s.linear.iterations;
      if (!s.linear.converged) out.any_linear_failure = true;
    }
    out.average_iterations.push_back({gamma, sum / res.steps.size()});

    if (!cfg.fields_output.empty() && gamma == cfg.gammas.back()) {
      const Mesh& mesh = meshes.finest();
      FunctionSpace V = make_velocity_space(mesh, cfg.k);
      viscoplastic_bcs(vp)(V);
      FunctionSpace Q = make_pressure_space(mesh, cfg.k);
      std::ofstream os(cfg.fields_output);
      write_fields_csv(vp, V, Q, res.u, res.p, os);
    }
  }
  return out;
}

void write_nonlinear_csv(const NonlinearResult& r, std::ostream& os) {
  os << "gamma,step,linear_iterations,linear_converged,nonlinear_residual\n";
  for (const auto& row : r.rows)
    os << row.gamma << "," << row.step << "," << row.linear_iterations << ","
       << (row.linear_converged ? 1 : 0) << "," << row.residual << "\n";
}

}  // namespace vvs
