#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vvs/config.hpp"
#include "vvs/spectral.hpp"

namespace vvs {

struct TableRow {
  double gamma = 0, dr = 0;
  std::string variant, w, smoother, transfer, inner;
  int dofs = 0;
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0;
};

struct TableResult {
  std::vector<TableRow> rows;
};

/// Iteration-count sweep over (gamma, DR). Convergence failures are data,
/// not errors.
TableResult run_table(const ExperimentConfig& cfg);
void write_table_csv(const TableResult& t, std::ostream& os);
void print_table(const TableResult& t, std::ostream& os);

struct VerifyResult {
  std::vector<BoundReport> reports;
  bool all_hold = false;
};

VerifyResult run_verify(const ExperimentConfig& cfg);

struct NonlinearResult {
  struct Row {
    double gamma = 0;
    int step = 0;
    int linear_iterations = 0;
    bool linear_converged = false;
    double residual = 0;
  };
  std::vector<Row> rows;
  std::vector<std::pair<double, double>> average_iterations;  // per gamma
  bool any_linear_failure = false;
};

NonlinearResult run_nonlinear(const ExperimentConfig& cfg);
void write_nonlinear_csv(const NonlinearResult& r, std::ostream& os);

}  // namespace vvs
