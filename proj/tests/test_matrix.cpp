#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "orthofit/errors.hpp"
#include "orthofit/matrix.hpp"

using namespace orthofit;

TEST_CASE("dense matrix construction and element access") {
  DenseMatrix z(2, 3);
  CHECK(z.rows() == 2);
  CHECK(z.cols() == 3);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(z(i, j) == 0.0);
  }

  DenseMatrix m(2, 2, {1.0, 2.0, 3.0, 4.0});
  CHECK(m(0, 1) == 2.0);
  CHECK(m(1, 0) == 3.0);

  const DenseMatrix eye = DenseMatrix::identity(3);
  CHECK(eye(0, 0) == 1.0);
  CHECK(eye(0, 1) == 0.0);
  CHECK(eye(2, 2) == 1.0);
}

TEST_CASE("dense matrix rejects wrong data length and non-finite entries") {
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
  const double nan = std::nan("");
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, nan}), std::invalid_argument);
  CHECK_THROWS_AS(DenseMatrix(1, 1, {HUGE_VAL}), std::invalid_argument);
}

TEST_CASE("matmul, transpose, matvec and subtract against hand results") {
  const DenseMatrix a(2, 2, {1.0, 2.0, 3.0, 4.0});
  const DenseMatrix b(2, 2, {5.0, 6.0, 7.0, 8.0});

  const DenseMatrix ab = matmul(a, b);
  CHECK(ab(0, 0) == doctest::Approx(19.0));
  CHECK(ab(0, 1) == doctest::Approx(22.0));
  CHECK(ab(1, 0) == doctest::Approx(43.0));
  CHECK(ab(1, 1) == doctest::Approx(50.0));

  const DenseMatrix at = transpose(a);
  CHECK(at(0, 1) == 3.0);
  CHECK(at(1, 0) == 2.0);

  const std::vector<double> y = matvec(a, {1.0, -1.0});
  CHECK(y[0] == doctest::Approx(-1.0));
  CHECK(y[1] == doctest::Approx(-1.0));

  const DenseMatrix d = subtract(b, a);
  CHECK(d(0, 0) == 4.0);
  CHECK(d(1, 1) == 4.0);
}

TEST_CASE("frobenius norm is exact on a 3-4-5 triangle and safe near overflow") {
  CHECK(frobenius_norm(DenseMatrix(1, 2, {3.0, 4.0})) == doctest::Approx(5.0));
  const DenseMatrix huge(1, 2, {3e200, 4e200});
  CHECK(frobenius_norm(huge) == doctest::Approx(5e200));
  CHECK(std::isfinite(frobenius_norm(huge)));
}

TEST_CASE("max_abs and max_column_norm") {
  const DenseMatrix m(2, 2, {1.0, -7.0, 3.0, 2.0});
  CHECK(max_abs(m) == 7.0);
  // columns: (1,3) norm sqrt(10); (-7,2) norm sqrt(53)
  CHECK(max_column_norm(m) == doctest::Approx(std::sqrt(53.0)));
}

TEST_CASE("orthogonality error is zero for the identity, exact for a diagonal") {
  CHECK(orthogonality_error(DenseMatrix::identity(4)) == doctest::Approx(0.0));
  // A = diag(1, 2): A'A - I = diag(0, 3)
  CHECK(orthogonality_error(DenseMatrix(2, 2, {1.0, 0.0, 0.0, 2.0})) ==
        doctest::Approx(3.0));
}

TEST_CASE("permutation validates its mapping") {
  CHECK_THROWS_AS(Permutation({0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(Permutation({0, 2}), std::invalid_argument);
  CHECK_NOTHROW(Permutation({2, 0, 1}));
}

TEST_CASE("permutation apply scatters rows and apply_transpose undoes it") {
  // mapping[j] is the destination row of source row j
  const Permutation p({1, 2, 0});
  const DenseMatrix m(3, 1, {10.0, 20.0, 30.0});

  const DenseMatrix pm = p.apply(m);
  CHECK(pm(1, 0) == 10.0);
  CHECK(pm(2, 0) == 20.0);
  CHECK(pm(0, 0) == 30.0);

  const DenseMatrix back = p.apply_transpose(pm);
  CHECK(back(0, 0) == 10.0);
  CHECK(back(1, 0) == 20.0);
  CHECK(back(2, 0) == 30.0);

  // dense form agrees with apply
  const DenseMatrix pd = matmul(p.to_dense(), m);
  for (std::size_t i = 0; i < 3; ++i) CHECK(pd(i, 0) == pm(i, 0));
}

TEST_CASE("permutation parity counts transpositions") {
  CHECK(Permutation::identity(4).parity() == 1);
  CHECK(Permutation({1, 0, 2}).parity() == -1);
  CHECK(Permutation({1, 2, 0}).parity() == 1);  // a 3-cycle is even
  CHECK(Permutation({1, 0, 3, 2}).parity() == 1);
}

TEST_CASE("unit lower triangular packing order is row by row") {
  // packed: (1,0), (2,0), (2,1)
  UnitLowerTriangular l(3, {4.0, 5.0, 6.0});
  CHECK(l.at(0, 0) == 1.0);
  CHECK(l.at(1, 1) == 1.0);
  CHECK(l.at(0, 1) == 0.0);
  CHECK(l.at(1, 0) == 4.0);
  CHECK(l.at(2, 0) == 5.0);
  CHECK(l.at(2, 1) == 6.0);

  l.set(2, 0, -1.5);
  CHECK(l.at(2, 0) == -1.5);

  const DenseMatrix d = l.to_dense();
  CHECK(d(2, 1) == 6.0);
  CHECK(d(1, 1) == 1.0);
  CHECK(d(0, 2) == 0.0);

  CHECK(UnitLowerTriangular::packed_size(5) == 10);
  CHECK_THROWS_AS(UnitLowerTriangular(3, {1.0, 2.0}), LengthMismatch);
}

TEST_CASE("upper triangular stores on and above the diagonal") {
  UpperTriangular r(3);
  r.set(0, 0, 1.0);
  r.set(0, 2, 2.0);
  r.set(1, 1, 3.0);
  r.set(2, 2, 4.0);
  CHECK(r.at(0, 2) == 2.0);
  CHECK(r.at(2, 0) == 0.0);  // below the diagonal reads zero
  CHECK(r.diagonal(1) == 3.0);

  const DenseMatrix d = r.to_dense();
  CHECK(d(0, 2) == 2.0);
  CHECK(d(1, 0) == 0.0);
}
