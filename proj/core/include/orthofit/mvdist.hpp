#ifndef ORTHOFIT_MVDIST_HPP
#define ORTHOFIT_MVDIST_HPP

#include <vector>

#include "orthofit/matrix.hpp"

namespace orthofit {

// Lower-triangular Cholesky factor of a symmetric positive definite
// matrix.  Construction throws NotPositiveDefinite when a pivot is not
// strictly positive.
class CholeskyFactor {
public:
  explicit CholeskyFactor(const DenseMatrix& spd);

  std::size_t order() const { return l_.rows(); }
  const DenseMatrix& lower() const { return l_; }
  double log_determinant() const;                       // of the factored matrix
  // Solves L y = b (forward substitution); ||y||^2 is then the
  // quadratic form b' A^-1 b of the factored matrix A.
  std::vector<double> forward_solve(const std::vector<double>& b) const;
  double quadratic_form(const std::vector<double>& b) const;

private:
  DenseMatrix l_;
};

struct MVNormalParams {
  MVNormalParams(std::vector<double> mean, DenseMatrix covariance);

  std::size_t dim() const { return mu.size(); }

  std::vector<double> mu;
  DenseMatrix sigma;
  CholeskyFactor chol;  // cached factor of sigma
};

// Upper bound for the kurtosis parameter: min(4d, 4d(d+2)/5).  Keeps
// the reshaping polynomial non-negative and the kurtosis coherent.
double beta_max(std::size_t d);

// Density reshaping polynomial in the squared Mahalanobis distance y:
//   q(y) = 1 + beta/(8 d (d+2)) * (y^2 - 2(d+2) y + d(d+2))
// Equals 1 everywhere at beta = 0.  Throws BetaOutOfRange when beta is
// outside [0, beta_max(d)].
double q_factor(double y, double beta, std::size_t d);

struct LNParams {
  LNParams(std::vector<double> mean, DenseMatrix covariance, double beta_shape);

  std::size_t dim() const { return normal.dim(); }

  MVNormalParams normal;
  double beta;
};

// Gaussian log density via the Cholesky factor of sigma.
double normal_logpdf(const std::vector<double>& x, const MVNormalParams& p);

// Leptokurtic-normal log density: the Gaussian log density plus the log
// of the reshaping polynomial at the squared Mahalanobis distance.
double ln_logpdf(const std::vector<double>& x, const LNParams& p);

// Mardia's multivariate kurtosis b2 minus its Gaussian value d(d+2).
// Scatter matrix uses divisor n.  Throws DegenerateGroup when n <= d or
// the scatter matrix is singular.
double empirical_excess_kurtosis(const DenseMatrix& data);

struct MardiaResult {
  double excess;   // b2 - d(d+2)
  double z;        // excess / sqrt(8 d (d+2) / n)
  double p_value;  // two-sided normal tail
};

MardiaResult mardia_kurtosis_test(const DenseMatrix& data);

// Standard normal CDF, accurate to ~1e-15 via erfc.
double normal_cdf(double x);

}  // namespace orthofit

#endif
