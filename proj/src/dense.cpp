#include "vvs/dense.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <stdexcept>

namespace vvs {

DenseMatrix to_dense(const CsrMatrix& A) {
  DenseMatrix M = DenseMatrix::Zero(A.nrows, A.ncols);
  for (int i = 0; i < A.nrows; ++i)
    for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
      M(i, A.col_idx[p]) = A.vals[p];
  return M;
}

LuFactor::LuFactor(const DenseMatrix& M) : lu_(M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("lu: square input required");
  lu_.setThreshold(1e-13);
  if (!lu_.isInvertible())
    throw std::runtime_error("lu: matrix is singular to working precision");
}

DenseVector LuFactor::solve(const DenseVector& b) const { return lu_.solve(b); }

LuFactor dense_lu_factor(const DenseMatrix& M) { return LuFactor(M); }

DenseVector dense_lu_solve(const LuFactor& f, const DenseVector& b) {
  return f.solve(b);
}

std::vector<double> generalized_sym_eig(const DenseMatrix& A, const DenseMatrix& B) {
  Eigen::LLT<DenseMatrix> llt(B);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("generalized eig: B is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(A, B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("generalized eig: iteration failed");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<double> sym_eig(const DenseMatrix& A) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym eig failed");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<double> singular_values(const DenseMatrix& M) {
  Eigen::JacobiSVD<DenseMatrix> svd(M);
  const auto& sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

DenseMatrix null_space_basis(const DenseMatrix& M, double rel_tol) {
  Eigen::JacobiSVD<DenseMatrix> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * smax) ++rank;
  return svd.matrixV().rightCols(M.cols() - rank);
}

int numeric_rank(const DenseMatrix& M, double rel_tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<DenseMatrix> svd(M);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * smax) ++rank;
  return rank;
}

DenseMatrix orthogonal_complement(const DenseVector& c) {
  const int n = static_cast<int>(c.size());
  Eigen::HouseholderQR<DenseMatrix> qr(c);
  DenseMatrix Q = qr.householderQ();
  return Q.rightCols(n - 1);
}

}  // namespace vvs
