#pragma once

#include <functional>
#include <span>
#include <vector>

namespace vvs {

using LinOp = std::function<void(std::span<const double>, std::span<double>)>;

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  // residual_history[0] = initial
  bool converged = false;
  double true_residual = 0.0;  // ||b - A x|| recomputed at exit
  double wall_seconds = 0.0;
};

struct FgmresOptions {
  double rtol = 1e-6;
  int maxit = 300;
  int restart = 0;  // 0 means restart = maxit (no restart)
};

/// Flexible GMRES with an optional right preconditioner (pass nullptr for
/// none). The preconditioned basis Z is stored so the preconditioner may
/// change between iterations. x is both initial guess and result.
SolveReport fgmres(int n, const LinOp& op, const LinOp* precond,
                   std::span<const double> b, std::span<double> x,
                   const FgmresOptions& opts);

}  // namespace vvs
