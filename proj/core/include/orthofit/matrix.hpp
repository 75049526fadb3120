#ifndef ORTHOFIT_MATRIX_HPP
#define ORTHOFIT_MATRIX_HPP

#include <cstddef>
#include <vector>

namespace orthofit {

namespace tol {
// Relative pivot threshold for factorizations and triangular solves.
inline constexpr double pivot = 1e-12;
// Relative symmetry check for the eigensolver.
inline constexpr double symmetry = 1e-9;
// ||Q'Q - I||_F threshold for accepting a matrix as orthogonal.
inline constexpr double orthogonality = 1e-8;
}  // namespace tol

// Row-major dense matrix of doubles.  Constructors reject NaN/Inf entries
// so factorizations can assume finite input throughout.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);  // zero-filled
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool all_finite() const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
// y = A x
std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
// Largest Euclidean column norm, computed with scaling so huge entries
// do not overflow.
double max_column_norm(const DenseMatrix& a);
// ||A'A - I||_F, the orthogonality defect.
double orthogonality_error(const DenseMatrix& a);

// Permutation of {0, ..., order-1}.  The induced matrix P places a 1 in
// row mapping[j] of column j, so (P * M) scatters row j of M to row
// mapping[j], and (P' * M) gathers row mapping[i] of M into row i.
class Permutation {
public:
  explicit Permutation(std::vector<std::size_t> mapping);
  static Permutation identity(std::size_t order);

  std::size_t order() const { return mapping_.size(); }
  const std::vector<std::size_t>& mapping() const { return mapping_; }

  DenseMatrix to_dense() const;
  DenseMatrix apply(const DenseMatrix& m) const;             // P * M
  DenseMatrix apply_transpose(const DenseMatrix& m) const;   // P' * M
  int parity() const;  // determinant of the induced matrix, +1 or -1

private:
  std::vector<std::size_t> mapping_;
};

// Unit lower triangular matrix stored as its strictly-sub-diagonal part,
// packed row by row: (1,0), (2,0), (2,1), (3,0), ...
class UnitLowerTriangular {
public:
  explicit UnitLowerTriangular(std::size_t order);
  UnitLowerTriangular(std::size_t order, std::vector<double> sub_diagonal);

  std::size_t order() const { return order_; }
  const std::vector<double>& sub_diagonal() const { return sub_; }

  static std::size_t packed_size(std::size_t order) { return order * (order - 1) / 2; }

  double at(std::size_t i, std::size_t j) const;  // any (i, j)
  void set(std::size_t i, std::size_t j, double value);  // requires i > j

  DenseMatrix to_dense() const;

private:
  std::size_t order_ = 0;
  std::vector<double> sub_;
};

// Upper triangular matrix, packed row by row on and above the diagonal.
class UpperTriangular {
public:
  explicit UpperTriangular(std::size_t order);

  std::size_t order() const { return order_; }

  double at(std::size_t i, std::size_t j) const;  // any (i, j)
  void set(std::size_t i, std::size_t j, double value);  // requires j >= i

  double diagonal(std::size_t i) const { return at(i, i); }
  DenseMatrix to_dense() const;

private:
  std::size_t order_ = 0;
  std::vector<double> packed_;
};

}  // namespace orthofit

#endif
