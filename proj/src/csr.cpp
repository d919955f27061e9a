#include "vvs/csr.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace vvs {

void CsrMatrix::spmv(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != ncols || static_cast<int>(y.size()) != nrows)
    throw std::invalid_argument("spmv: size mismatch");
  for (int i = 0; i < nrows; ++i) {
    double s = 0.0;
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += vals[p] * x[col_idx[p]];
    y[i] = s;
  }
}

void CsrMatrix::spmv_add(std::span<const double> x, std::span<double> y,
                         double alpha) const {
  if (static_cast<int>(x.size()) != ncols || static_cast<int>(y.size()) != nrows)
    throw std::invalid_argument("spmv_add: size mismatch");
  for (int i = 0; i < nrows; ++i) {
    double s = 0.0;
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += vals[p] * x[col_idx[p]];
    y[i] += alpha * s;
  }
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix T;
  T.nrows = ncols;
  T.ncols = nrows;
  T.row_ptr.assign(ncols + 1, 0);
  for (int c : col_idx) ++T.row_ptr[c + 1];
  for (int i = 0; i < ncols; ++i) T.row_ptr[i + 1] += T.row_ptr[i];
  T.col_idx.resize(nnz());
  T.vals.resize(nnz());
  std::vector<int> next(T.row_ptr.begin(), T.row_ptr.end() - 1);
  for (int i = 0; i < nrows; ++i)
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      const int q = next[col_idx[p]]++;
      T.col_idx[q] = i;
      T.vals[q] = vals[p];
    }
  return T;
}

double CsrMatrix::get(int i, int j) const {
  const auto begin = col_idx.begin() + row_ptr[i];
  const auto end = col_idx.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return vals[it - col_idx.begin()];
}

double* CsrMatrix::find(int i, int j) {
  const auto begin = col_idx.begin() + row_ptr[i];
  const auto end = col_idx.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return nullptr;
  return &vals[it - col_idx.begin()];
}

void CsrMatrix::set_unit_row(int i, double diag) {
  for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
    vals[p] = (col_idx[p] == i) ? diag : 0.0;
}

CsrMatrix TripletBuilder::build() const {
  std::vector<Entry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  CsrMatrix M;
  M.nrows = nrows_;
  M.ncols = ncols_;
  M.row_ptr.assign(nrows_ + 1, 0);
  for (std::size_t s = 0; s < sorted.size();) {
    std::size_t t = s;
    double v = 0.0;
    while (t < sorted.size() && sorted[t].i == sorted[s].i && sorted[t].j == sorted[s].j)
      v += sorted[t++].v;
    M.col_idx.push_back(sorted[s].j);
    M.vals.push_back(v);
    ++M.row_ptr[sorted[s].i + 1];
    s = t;
  }
  for (int i = 0; i < nrows_; ++i) M.row_ptr[i + 1] += M.row_ptr[i];
  return M;
}

void write_matrix_market(const CsrMatrix& A, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.nrows << " " << A.ncols << " " << A.nnz() << "\n";
  os.precision(17);
  for (int i = 0; i < A.nrows; ++i)
    for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
      os << i + 1 << " " << A.col_idx[p] + 1 << " " << A.vals[p] << "\n";
}

void write_matrix_market_vector(std::span<const double> v, std::ostream& os) {
  os << "%%MatrixMarket matrix array real general\n";
  os << v.size() << " 1\n";
  os.precision(17);
  for (double x : v) os << x << "\n";
}

BandedCholesky::BandedCholesky(const CsrMatrix& A) {
  if (A.nrows != A.ncols) throw std::invalid_argument("banded cholesky: square input");
  n_ = A.nrows;
  bw_ = 0;
  for (int i = 0; i < n_; ++i)
    for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
      bw_ = std::max(bw_, std::abs(A.col_idx[p] - i));

  const int w = bw_ + 1;
  band_.assign(static_cast<std::size_t>(n_) * w, 0.0);
  // band_[i*w + d] holds entry (i, i-d), d in [0, bw]
  for (int i = 0; i < n_; ++i)
    for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
      const int j = A.col_idx[p];
      if (j <= i) band_[static_cast<std::size_t>(i) * w + (i - j)] = A.vals[p];
    }

  for (int j = 0; j < n_; ++j) {
    double d = band_[static_cast<std::size_t>(j) * w];
    for (int k = std::max(0, j - bw_); k < j; ++k) {
      const double l = band_[static_cast<std::size_t>(j) * w + (j - k)];
      d -= l * l;
    }
    if (!(d > 0.0))
      throw std::runtime_error("banded cholesky: matrix is not positive definite");
    const double dj = std::sqrt(d);
    band_[static_cast<std::size_t>(j) * w] = dj;
    const int iend = std::min(n_, j + bw_ + 1);
    for (int i = j + 1; i < iend; ++i) {
      double s = band_[static_cast<std::size_t>(i) * w + (i - j)];
      const int k0 = std::max({0, i - bw_, j - bw_});
      for (int k = k0; k < j; ++k)
        s -= band_[static_cast<std::size_t>(i) * w + (i - k)] *
             band_[static_cast<std::size_t>(j) * w + (j - k)];
      band_[static_cast<std::size_t>(i) * w + (i - j)] = s / dj;
    }
  }
}

void BandedCholesky::solve(std::span<double> x) const {
  if (static_cast<int>(x.size()) != n_)
    throw std::invalid_argument("banded cholesky solve: size mismatch");
  const int w = bw_ + 1;
  for (int i = 0; i < n_; ++i) {
    double s = x[i];
    for (int k = std::max(0, i - bw_); k < i; ++k)
      s -= band_[static_cast<std::size_t>(i) * w + (i - k)] * x[k];
    x[i] = s / band_[static_cast<std::size_t>(i) * w];
  }
  for (int i = n_ - 1; i >= 0; --i) {
    double s = x[i];
    const int kend = std::min(n_, i + bw_ + 1);
    for (int k = i + 1; k < kend; ++k)
      s -= band_[static_cast<std::size_t>(k) * w + (k - i)] * x[k];
    x[i] = s / band_[static_cast<std::size_t>(i) * w];
  }
}

}  // namespace vvs
