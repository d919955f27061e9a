// Command-line driver; talks to the solver library through its C API only.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "vvstokes.h"

namespace {

struct RunHandle {
  vvs_run* run = nullptr;
  ~RunHandle() { vvs_run_destroy(run); }
};

int make_run(RunHandle& h, const std::string& config, const std::string& dump_dir,
             int threads, const std::string& output) {
  int rc = vvs_run_create(&h.run, config.c_str());
  if (rc != VVS_OK) return rc;
  if (!dump_dir.empty()) {
    rc = vvs_run_set_option(h.run, "dump_dir", dump_dir.c_str());
    if (rc != VVS_OK) return rc;
  }
  if (!output.empty()) {
    rc = vvs_run_set_option(h.run, "output", output.c_str());
    if (rc != VVS_OK) return rc;
  }
  if (threads > 0) {
    rc = vvs_run_set_option(h.run, "threads", std::to_string(threads).c_str());
    if (rc != VVS_OK) return rc;
  }
  return VVS_OK;
}

int report(int rc) {
  if (rc != VVS_OK) std::fprintf(stderr, "error: %s\n", vvs_last_error());
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stokes solver experiments: augmented Lagrangian preconditioning "
               "with gamma-robust multigrid"};
  app.footer(
      "CSV columns\n"
      "  table:     gamma,dr,variant,w,smoother,transfer,inner,dofs,iterations,"
      "converged,wall_seconds\n"
      "  verify:    gamma,variant,c_mu,C_mu,d_mu,D_mu,e_mu,E_mu,f_mu,F_mu,"
      "lambda_min,lambda_max,holds\n"
      "  nonlinear: gamma,step,linear_iterations,linear_converged,"
      "nonlinear_residual\n"
      "wall_seconds is excluded from determinism guarantees.\n");

  std::string config, dump_dir, output;
  int threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "config file (key = value lines)")->required();
    cmd->add_option("--dump-matrices", dump_dir,
                    "write Matrix Market files for cross-checking");
    cmd->add_option("--output", output, "CSV output path (overrides config)");
    cmd->add_option("--threads", threads, "concurrent runs in the (gamma, DR) sweep");
  };

  CLI::App* table = app.add_subcommand(
      "table", "iteration counts over (gamma, DR); reproduces the solver tables");
  CLI::App* verify = app.add_subcommand(
      "verify", "dense spectral check of the Schur approximation bounds");
  CLI::App* nonlinear = app.add_subcommand(
      "nonlinear", "viscoplastic Newton experiment (per-step linear iterations)");
  add_common(table);
  add_common(verify);
  add_common(nonlinear);
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  RunHandle h;
  int rc = make_run(h, config, dump_dir, threads, output);
  if (rc != VVS_OK) return report(rc);

  if (table->parsed()) return report(vvs_run_table(h.run));
  if (verify->parsed()) return report(vvs_run_verify(h.run));
  if (nonlinear->parsed()) return report(vvs_run_nonlinear(h.run));
  return 0;
}
