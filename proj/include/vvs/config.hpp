#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vvs/al_precond.hpp"
#include "vvs/multigrid.hpp"

namespace vvs {

enum class ProblemKind { Sinker, Viscoplastic, Constant };
enum class InnerSolver { Multigrid, Lu };
enum class SystemKind { Stokes, TopLeft };

/// Parsed from a line-oriented `key = value` file with `#` comments.
/// Unknown keys are errors.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::Sinker;
  int nx = 8, ny = 8;      // coarsest mesh (ignored for viscoplastic grading)
  int levels = 3;
  int k = 2;
  std::vector<double> gammas{0.0, 10.0, 1000.0};
  std::vector<double> drs{1e4};
  SchurVariant variant = SchurVariant::P1;
  WChoice w = WChoice::Mp;
  SmootherKind smoother = SmootherKind::Star;
  TransferKind transfer = TransferKind::Robust;
  CycleType cycle = CycleType::F;
  int pre_smooth = 5, post_smooth = 5;
  double rtol = 1e-6;
  int maxit = 300;
  InnerSolver inner = InnerSolver::Multigrid;
  SystemKind system = SystemKind::Stokes;

  // sinker; 0 = auto (8, or 24 once the coarse mesh reaches 32x32 cells)
  int sinker_n = 0;
  double sinker_omega = 0.1, sinker_delta = 200.0, sinker_beta = 10.0;
  std::uint64_t seed = 1;

  // constant-viscosity problem
  double const_mu = 1.0;

  // viscoplastic
  double tau_y = 100.0;
  double newton_rtol = 1e-8;
  int newton_maxit = 15;
  bool linear_rheology = false;

  // verify
  double verify_tol = 1e-9;
  double debug_scale_shat = 1.0;
  int verify_max_dofs = 3000;

  std::string output;         // CSV path ("" = stdout only)
  std::string fields_output;  // viscoplastic field CSV
  std::string dump_dir;       // Matrix Market dump directory
  int threads = 1;

  MgOptions mg_options() const;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
void apply_config_option(ExperimentConfig& cfg, const std::string& key,
                         const std::string& value);

/// One-line-per-key summary of the recognized keys (for --help).
std::string config_help();

}  // namespace vvs
