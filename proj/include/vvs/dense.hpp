#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "vvs/csr.hpp"

namespace vvs {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

DenseMatrix to_dense(const CsrMatrix& A);

/// Dense LU with an explicit singularity check.
class LuFactor {
 public:
  explicit LuFactor(const DenseMatrix& M);  // throws on singular input
  DenseVector solve(const DenseVector& b) const;

 private:
  Eigen::FullPivLU<DenseMatrix> lu_;
};

LuFactor dense_lu_factor(const DenseMatrix& M);
DenseVector dense_lu_solve(const LuFactor& f, const DenseVector& b);

/// Eigenvalues of B^{-1} A, ascending, for symmetric A and SPD B (Cholesky
/// reduction to a standard symmetric problem). Throws if B is not SPD.
std::vector<double> generalized_sym_eig(const DenseMatrix& A, const DenseMatrix& B);

std::vector<double> sym_eig(const DenseMatrix& A);

/// Singular values, descending.
std::vector<double> singular_values(const DenseMatrix& M);

/// Orthonormal basis of the null space of M, with rank decided at
/// sigma > tol * sigma_max.
DenseMatrix null_space_basis(const DenseMatrix& M, double rel_tol = 1e-8);

int numeric_rank(const DenseMatrix& M, double rel_tol = 1e-8);

/// Orthonormal basis of the orthogonal complement of a single vector.
DenseMatrix orthogonal_complement(const DenseVector& c);

}  // namespace vvs
