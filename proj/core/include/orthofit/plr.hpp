#ifndef ORTHOFIT_PLR_HPP
#define ORTHOFIT_PLR_HPP

#include <vector>

#include "orthofit/factor.hpp"
#include "orthofit/matrix.hpp"

namespace orthofit {

// Square matrix validated as orthogonal on construction
// (||Q'Q - I||_F within tolerance, else NotOrthogonal).
class OrthogonalMatrix {
public:
  explicit OrthogonalMatrix(DenseMatrix q);

  std::size_t order() const { return q_.rows(); }
  const DenseMatrix& matrix() const { return q_; }
  double operator()(std::size_t i, std::size_t j) const { return q_(i, j); }

private:
  DenseMatrix q_;
};

// The pair that parameterizes an orthogonal matrix: a permutation P and
// a unit lower triangular L.  The d*(d-1)/2 free entries of L are the
// unconstrained coordinates; P is a fixed nuisance choice.
struct PLRFactors {
  Permutation p;
  UnitLowerTriangular l;
};

// Maps factors to an orthogonal matrix: form A = P * L, take the QR
// factorization A = Q R (R's diagonal positive), return Q = P L R^-1.
// Never inverts R explicitly.
OrthogonalMatrix plr_compose(const Permutation& p, const UnitLowerTriangular& l);

// Inverse direction: P and L are read off the partially pivoted LU
// factorization of Q.  Composing them back reproduces Q up to the signs
// of the columns whose LU diagonal came out negative; the sign
// information itself is not representable in (P, L), and the common
// principal component likelihood is invariant to it.
PLRFactors plr_decompose(const OrthogonalMatrix& q);

// Column sign diagnostic for a decomposition: entry h is the sign of
// U_hh in the pivoted LU of Q, i.e. plr_compose(plr_decompose(Q))
// equals Q with column h negated wherever the entry is -1.
std::vector<int> plr_column_signs(const OrthogonalMatrix& q);

// Flatten L's strictly-sub-diagonal entries into an optimizer vector
// (row-major), and back.  unpack throws LengthMismatch when the vector
// length is not d*(d-1)/2.
std::vector<double> pack(const UnitLowerTriangular& l);
UnitLowerTriangular unpack(std::size_t order, const std::vector<double>& v);

}  // namespace orthofit

#endif
