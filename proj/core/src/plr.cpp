#include "orthofit/plr.hpp"

#include <cmath>
#include <utility>

#include "orthofit/errors.hpp"

namespace orthofit {

OrthogonalMatrix::OrthogonalMatrix(DenseMatrix q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols() || q_.rows() == 0) {
    throw NotOrthogonal("OrthogonalMatrix: matrix must be square and non-empty");
  }
  const double err = orthogonality_error(q_);
  if (!(err <= tol::orthogonality)) {
    throw NotOrthogonal("OrthogonalMatrix: ||Q'Q - I|| = " + std::to_string(err) +
                        " exceeds tolerance");
  }
}

OrthogonalMatrix plr_compose(const Permutation& p, const UnitLowerTriangular& l) {
  if (p.order() != l.order()) {
    throw LengthMismatch("plr_compose: permutation and triangle orders differ");
  }
  const DenseMatrix a = p.apply(l.to_dense());
  QrResult qr = qr_decompose(a);
  return OrthogonalMatrix(std::move(qr.q));
}

PLRFactors plr_decompose(const OrthogonalMatrix& q) {
  PluResult plu = plu_decompose(q.matrix());
  return PLRFactors{std::move(plu.p), std::move(plu.l)};
}

std::vector<int> plr_column_signs(const OrthogonalMatrix& q) {
  PluResult plu = plu_decompose(q.matrix());
  std::vector<int> signs(q.order());
  for (std::size_t h = 0; h < q.order(); ++h) {
    signs[h] = (plu.u.diagonal(h) < 0.0) ? -1 : 1;
  }
  return signs;
}

std::vector<double> pack(const UnitLowerTriangular& l) {
  return l.sub_diagonal();
}

UnitLowerTriangular unpack(std::size_t order, const std::vector<double>& v) {
  if (v.size() != UnitLowerTriangular::packed_size(order)) {
    throw LengthMismatch("unpack: expected " +
                         std::to_string(UnitLowerTriangular::packed_size(order)) +
                         " entries, got " + std::to_string(v.size()));
  }
  return UnitLowerTriangular(order, v);
}

}  // namespace orthofit
