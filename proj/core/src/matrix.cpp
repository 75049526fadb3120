#include "orthofit/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "orthofit/errors.hpp"

namespace orthofit {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("DenseMatrix: data length does not match dimensions");
  }
  if (!all_finite()) {
    throw std::invalid_argument("DenseMatrix: non-finite entry");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ");
  }
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        c(i, j) += ail * b(l, j);
      }
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) {
    throw std::invalid_argument("matvec: dimension mismatch");
  }
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("subtract: dimension mismatch");
  }
  DenseMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

double frobenius_norm(const DenseMatrix& a) {
  // Scaled accumulation; plain sum-of-squares overflows near 1e154.
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : a.data()) {
    if (v == 0.0) continue;
    const double av = std::fabs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::fabs(v));
  return m;
}

double max_column_norm(const DenseMatrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double scale = 0.0;
    double ssq = 1.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double av = std::fabs(a(i, j));
      if (av == 0.0) continue;
      if (scale < av) {
        ssq = 1.0 + ssq * (scale / av) * (scale / av);
        scale = av;
      } else {
        ssq += (av / scale) * (av / scale);
      }
    }
    best = std::max(best, scale * std::sqrt(ssq));
  }
  return best;
}

double orthogonality_error(const DenseMatrix& a) {
  return frobenius_norm(subtract(matmul(transpose(a), a),
                                 DenseMatrix::identity(a.cols())));
}

Permutation::Permutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
  std::vector<bool> seen(mapping_.size(), false);
  for (std::size_t v : mapping_) {
    if (v >= mapping_.size() || seen[v]) {
      throw std::invalid_argument("Permutation: mapping is not a bijection");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t order) {
  std::vector<std::size_t> m(order);
  for (std::size_t i = 0; i < order; ++i) m[i] = i;
  return Permutation(std::move(m));
}

DenseMatrix Permutation::to_dense() const {
  DenseMatrix p(order(), order());
  for (std::size_t j = 0; j < order(); ++j) p(mapping_[j], j) = 1.0;
  return p;
}

DenseMatrix Permutation::apply(const DenseMatrix& m) const {
  if (m.rows() != order()) {
    throw std::invalid_argument("Permutation::apply: dimension mismatch");
  }
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(mapping_[i], j) = m(i, j);
  }
  return out;
}

DenseMatrix Permutation::apply_transpose(const DenseMatrix& m) const {
  if (m.rows() != order()) {
    throw std::invalid_argument("Permutation::apply_transpose: dimension mismatch");
  }
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(mapping_[i], j);
  }
  return out;
}

int Permutation::parity() const {
  // Count transpositions by walking the cycles.
  std::vector<bool> seen(order(), false);
  int sign = 1;
  for (std::size_t i = 0; i < order(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = mapping_[j]) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

namespace {
std::size_t lower_index(std::size_t i, std::size_t j) {
  // Row i holds i strictly-sub-diagonal entries; rows above it hold i*(i-1)/2.
  return i * (i - 1) / 2 + j;
}
}  // namespace

UnitLowerTriangular::UnitLowerTriangular(std::size_t order)
    : order_(order), sub_(packed_size(order), 0.0) {}

UnitLowerTriangular::UnitLowerTriangular(std::size_t order, std::vector<double> sub_diagonal)
    : order_(order), sub_(std::move(sub_diagonal)) {
  if (sub_.size() != packed_size(order)) {
    throw LengthMismatch("UnitLowerTriangular: packed length must be order*(order-1)/2");
  }
  for (double v : sub_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("UnitLowerTriangular: non-finite entry");
    }
  }
}

double UnitLowerTriangular::at(std::size_t i, std::size_t j) const {
  if (i == j) return 1.0;
  if (i < j) return 0.0;
  return sub_[lower_index(i, j)];
}

void UnitLowerTriangular::set(std::size_t i, std::size_t j, double value) {
  if (i <= j) {
    throw std::invalid_argument("UnitLowerTriangular::set: entry not below the diagonal");
  }
  sub_[lower_index(i, j)] = value;
}

DenseMatrix UnitLowerTriangular::to_dense() const {
  DenseMatrix m(order_, order_);
  for (std::size_t i = 0; i < order_; ++i) {
    m(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) m(i, j) = sub_[lower_index(i, j)];
  }
  return m;
}

UpperTriangular::UpperTriangular(std::size_t order)
    : order_(order), packed_(order * (order + 1) / 2, 0.0) {}

namespace {
std::size_t upper_index(std::size_t i, std::size_t j, std::size_t order) {
  // Row i starts after rows 0..i-1, which hold order + (order-1) + ... entries.
  return i * order - i * (i - 1) / 2 + (j - i);
}
}  // namespace

double UpperTriangular::at(std::size_t i, std::size_t j) const {
  if (i > j) return 0.0;
  return packed_[upper_index(i, j, order_)];
}

void UpperTriangular::set(std::size_t i, std::size_t j, double value) {
  if (i > j) {
    throw std::invalid_argument("UpperTriangular::set: entry below the diagonal");
  }
  packed_[upper_index(i, j, order_)] = value;
}

DenseMatrix UpperTriangular::to_dense() const {
  DenseMatrix m(order_, order_);
  for (std::size_t i = 0; i < order_; ++i) {
    for (std::size_t j = i; j < order_; ++j) m(i, j) = at(i, j);
  }
  return m;
}

}  // namespace orthofit
