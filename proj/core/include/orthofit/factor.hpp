#ifndef ORTHOFIT_FACTOR_HPP
#define ORTHOFIT_FACTOR_HPP

#include <vector>

#include "orthofit/matrix.hpp"

namespace orthofit {

struct QrResult {
  DenseMatrix q;
  UpperTriangular r;
};

struct PluResult {
  Permutation p;
  UnitLowerTriangular l;
  UpperTriangular u;
};

struct EigenResult {
  std::vector<double> values;   // descending
  DenseMatrix vectors;          // columns, matching values
};

// Householder QR of a square matrix, with R's diagonal made strictly
// positive (the sign choice that pins the factorization down uniquely).
// Throws SingularMatrix when a diagonal of R falls below the relative
// pivot tolerance.
QrResult qr_decompose(const DenseMatrix& a);

// LU with partial pivoting: A = P * L * U.  The pivot row is the one
// with the largest absolute value; ties go to the smallest row index,
// so the factors are reproducible bit for bit.
PluResult plu_decompose(const DenseMatrix& a);

// Unpivoted Doolittle factorization of P' * A keeping the permutation
// fixed; the unit lower triangular factor L satisfies P * L * U = A.
// Used where a previously chosen permutation must be preserved.
UnitLowerTriangular unit_lower_factor(const Permutation& p, const DenseMatrix& a);

// Cyclic Jacobi eigendecomposition of a symmetric matrix.  Eigenvalues
// come back in descending order; each eigenvector is scaled so that its
// largest-magnitude entry is positive (smallest index on ties).
EigenResult symmetric_eigen(const DenseMatrix& s);

// Back-substitution solve of R x = b for upper triangular R.
std::vector<double> solve_upper_triangular(const UpperTriangular& r,
                                           const std::vector<double>& b);

}  // namespace orthofit

#endif
