#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace vvs {

/// Compressed sparse row matrix with sorted, unique column indices per row.
struct CsrMatrix {
  int nrows = 0, ncols = 0;
  std::vector<int> row_ptr;   // nrows+1
  std::vector<int> col_idx;
  std::vector<double> vals;

  std::size_t nnz() const { return col_idx.size(); }

  void spmv(std::span<const double> x, std::span<double> y) const;  // y = A x
  void spmv_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;
  CsrMatrix transposed() const;

  double get(int i, int j) const;          // 0 if not stored
  double* find(int i, int j);              // nullptr if not stored

  /// Zero row i except the diagonal, which is set to `diag`.
  void set_unit_row(int i, double diag);
};

/// Accumulates (i, j, v) triplets; duplicate entries are summed.
class TripletBuilder {
 public:
  TripletBuilder(int nrows, int ncols) : nrows_(nrows), ncols_(ncols) {}
  void reserve(std::size_t n) { entries_.reserve(n); }
  void add(int i, int j, double v) { entries_.push_back({i, j, v}); }
  CsrMatrix build() const;

 private:
  struct Entry { int i, j; double v; };
  int nrows_, ncols_;
  std::vector<Entry> entries_;
};

void write_matrix_market(const CsrMatrix& A, std::ostream& os);
void write_matrix_market_vector(std::span<const double> v, std::ostream& os);

/// Banded Cholesky factorization for sparse SPD matrices; used for the exact
/// (1,1)-block solves and the multigrid coarse solve. Throws if a pivot is
/// not positive.
class BandedCholesky {
 public:
  explicit BandedCholesky(const CsrMatrix& A);
  void solve(std::span<double> x) const;  // in place
  int bandwidth() const { return bw_; }

 private:
  int n_ = 0, bw_ = 0;
  std::vector<double> band_;  // L(i, i-d) at band_[i*(bw_+1)+d]
};

}  // namespace vvs
