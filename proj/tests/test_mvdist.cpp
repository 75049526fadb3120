#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "orthofit/errors.hpp"
#include "orthofit/mvdist.hpp"
#include "support.hpp"

using namespace orthofit;

namespace {

// 2d points at +-sqrt(d) along each axis; their scatter is the identity and
// every squared distance equals d, so the kurtosis excess is exactly -2d.
DenseMatrix axis_sphere(std::size_t d) {
  DenseMatrix m(2 * d, d);
  const double r = std::sqrt(static_cast<double>(d));
  for (std::size_t h = 0; h < d; ++h) {
    m(2 * h, h) = r;
    m(2 * h + 1, h) = -r;
  }
  return m;
}

}  // namespace

TEST_CASE("cholesky factor of a 2x2 with known factor and quadratic form") {
  const DenseMatrix a(2, 2, {4.0, 2.0, 2.0, 5.0});
  const CholeskyFactor chol(a);
  CHECK(chol.lower()(0, 0) == doctest::Approx(2.0));
  CHECK(chol.lower()(1, 0) == doctest::Approx(1.0));
  CHECK(chol.lower()(1, 1) == doctest::Approx(2.0));
  CHECK(chol.log_determinant() == doctest::Approx(std::log(16.0)).epsilon(1e-14));
  CHECK(chol.quadratic_form({2.0, 3.0}) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("cholesky rejects indefinite matrices") {
  CHECK_THROWS_AS(CholeskyFactor(DenseMatrix(2, 2, {1.0, 2.0, 2.0, 1.0})),
                  NotPositiveDefinite);
  CHECK_THROWS_AS(CholeskyFactor(DenseMatrix(2, 2, {1.0, 1.0, 1.0, 1.0})),
                  NotPositiveDefinite);
}

TEST_CASE("kurtosis shape bound switches regime at dimension three") {
  CHECK(beta_max(1) == doctest::Approx(2.4));
  CHECK(beta_max(2) == doctest::Approx(6.4));
  CHECK(beta_max(3) == doctest::Approx(12.0));
  CHECK(beta_max(4) == doctest::Approx(16.0));
  CHECK(beta_max(5) == doctest::Approx(20.0));
  CHECK_THROWS_AS(beta_max(0), std::invalid_argument);
}

TEST_CASE("reshaping polynomial hits its landmark values") {
  for (std::size_t d : {1ul, 2ul, 3ul, 6ul}) {
    const double dd = static_cast<double>(d);
    for (double beta : {0.0, 0.5 * beta_max(d), beta_max(d)}) {
      CHECK(q_factor(0.0, beta, d) == doctest::Approx(1.0 + beta / 8.0).epsilon(1e-14));
      CHECK(q_factor(dd, beta, d) ==
            doctest::Approx(1.0 - beta / (4.0 * (dd + 2.0))).epsilon(1e-14));
      // minimum sits at y = d + 2
      CHECK(q_factor(dd + 2.0, beta, d) ==
            doctest::Approx(1.0 - beta / (4.0 * dd)).epsilon(1e-13));
      CHECK(q_factor(dd + 2.0, beta, d) >= -1e-14);
    }
    CHECK(q_factor(3.7, 0.0, d) == 1.0);
  }
  CHECK_THROWS_AS(q_factor(1.0, -0.1, 2), BetaOutOfRange);
  CHECK_THROWS_AS(q_factor(1.0, 6.5, 2), BetaOutOfRange);
}

TEST_CASE("normal log density at exact reference points") {
  const MVNormalParams std1({0.0}, DenseMatrix(1, 1, {1.0}));
  CHECK(normal_logpdf({0.0}, std1) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-15));

  const MVNormalParams std2({0.0, 0.0}, DenseMatrix::identity(2));
  CHECK(normal_logpdf({1.0, 1.0}, std2) ==
        doctest::Approx(-2.837877066409345).epsilon(1e-15));
}

TEST_CASE("leptokurtic density collapses to the normal at beta zero") {
  testsupport::Rng rng(20240819);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
    const DenseMatrix sigma = testsupport::random_spd(rng, d);
    std::vector<double> mu(d), x(d);
    std::normal_distribution<double> g(0.0, 2.0);
    for (double& v : mu) v = g(rng);
    for (double& v : x) v = g(rng);
    const MVNormalParams np(mu, sigma);
    const LNParams lp(mu, sigma, 0.0);
    CHECK(std::fabs(ln_logpdf(x, lp) - normal_logpdf(x, np)) <= 1e-14);
  }
}

TEST_CASE("leptokurtic density is the normal density times the polynomial") {
  const std::vector<double> mu{0.5, -1.0};
  const DenseMatrix sigma(2, 2, {2.0, 0.6, 0.6, 1.0});
  const MVNormalParams np(mu, sigma);
  const CholeskyFactor chol(sigma);
  const double beta = 3.0;
  const LNParams lp(mu, sigma, beta);
  for (const auto& x : {std::vector<double>{0.0, 0.0}, {1.0, -2.0}, {3.0, 1.0}}) {
    std::vector<double> c{x[0] - mu[0], x[1] - mu[1]};
    const double maha = chol.quadratic_form(c);
    const double expected = normal_logpdf(x, np) + std::log(q_factor(maha, beta, 2));
    CHECK(ln_logpdf(x, lp) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("leptokurtic density reports -inf where the polynomial vanishes") {
  // at d = 3 the upper bound is 4d, where the polynomial touches zero at
  // squared distance d + 2 = 5; the point (1, 2, 0) hits it exactly
  const std::size_t d = 3;
  CHECK(q_factor(5.0, beta_max(d), d) == 0.0);
  const LNParams lp({0.0, 0.0, 0.0}, DenseMatrix::identity(3), beta_max(d));
  const std::vector<double> x{1.0, 2.0, 0.0};
  CHECK(ln_logpdf(x, lp) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("one-dimensional leptokurtic density integrates to one") {
  // coarse trapezoid check; the thorough multi-beta version lives in the
  // acceptance suite
  const double sigma2 = 1.7;
  const LNParams lp({0.3}, DenseMatrix(1, 1, {sigma2}), 0.5 * beta_max(1));
  const double h = 0.001;
  double sum = 0.0;
  for (double x = 0.3 - 12.0; x <= 0.3 + 12.0; x += h) {
    sum += std::exp(ln_logpdf({x}, lp)) * h;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("axis-sphere data has excess kurtosis exactly -2d") {
  for (std::size_t d : {1ul, 2ul, 3ul, 5ul}) {
    const double excess = empirical_excess_kurtosis(axis_sphere(d));
    CHECK(excess == doctest::Approx(-2.0 * static_cast<double>(d)).epsilon(1e-12));
  }
}

TEST_CASE("kurtosis requires more rows than columns and a full-rank scatter") {
  CHECK_THROWS_AS(empirical_excess_kurtosis(DenseMatrix(2, 2, {1.0, 0.0, 0.0, 1.0})),
                  DegenerateGroup);
  // three collinear points
  CHECK_THROWS_AS(
      empirical_excess_kurtosis(DenseMatrix(3, 2, {1.0, 1.0, 2.0, 2.0, 3.0, 3.0})),
      DegenerateGroup);
}

TEST_CASE("mardia statistic on axis-sphere data") {
  // excess = -2d and n = 2d give z = -d / sqrt(d + 2)
  const std::size_t d = 2;
  const MardiaResult r = mardia_kurtosis_test(axis_sphere(d));
  CHECK(r.excess == doctest::Approx(-4.0));
  CHECK(r.z == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.31731050786291415).epsilon(1e-12));
}

TEST_CASE("standard normal cdf reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-6));
}
