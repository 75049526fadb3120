#include "orthofit/mvdist.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "orthofit/errors.hpp"

namespace orthofit {

CholeskyFactor::CholeskyFactor(const DenseMatrix& spd) : l_(spd.rows(), spd.cols()) {
  if (spd.rows() != spd.cols() || spd.rows() == 0) {
    throw NotPositiveDefinite("CholeskyFactor: matrix must be square and non-empty");
  }
  const std::size_t d = spd.rows();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      if (i == j) {
        if (!(s > 0.0)) {
          throw NotPositiveDefinite("CholeskyFactor: non-positive pivot at index " +
                                    std::to_string(i));
        }
        l_(i, i) = std::sqrt(s);
      } else {
        l_(i, j) = s / l_(j, j);
      }
    }
  }
}

double CholeskyFactor::log_determinant() const {
  double s = 0.0;
  for (std::size_t i = 0; i < order(); ++i) s += std::log(l_(i, i));
  return 2.0 * s;
}

std::vector<double> CholeskyFactor::forward_solve(const std::vector<double>& b) const {
  if (b.size() != order()) {
    throw std::invalid_argument("CholeskyFactor::forward_solve: length mismatch");
  }
  std::vector<double> y(order());
  for (std::size_t i = 0; i < order(); ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= l_(i, j) * y[j];
    y[i] = s / l_(i, i);
  }
  return y;
}

double CholeskyFactor::quadratic_form(const std::vector<double>& b) const {
  const std::vector<double> y = forward_solve(b);
  double s = 0.0;
  for (double v : y) s += v * v;
  return s;
}

MVNormalParams::MVNormalParams(std::vector<double> mean, DenseMatrix covariance)
    : mu(std::move(mean)), sigma(std::move(covariance)), chol(sigma) {
  if (mu.size() != sigma.rows()) {
    throw std::invalid_argument("MVNormalParams: mean and covariance dimensions differ");
  }
}

double beta_max(std::size_t d) {
  if (d == 0) {
    throw std::invalid_argument("beta_max: dimension must be positive");
  }
  const double dd = static_cast<double>(d);
  return std::min(4.0 * dd, 4.0 * dd * (dd + 2.0) / 5.0);
}

double q_factor(double y, double beta, std::size_t d) {
  const double bmax = beta_max(d);
  if (!(beta >= 0.0) || !(beta <= bmax)) {
    throw BetaOutOfRange("q_factor: beta = " + std::to_string(beta) +
                         " outside [0, " + std::to_string(bmax) + "]");
  }
  const double dd = static_cast<double>(d);
  const double bracket = y * y - 2.0 * (dd + 2.0) * y + dd * (dd + 2.0);
  return 1.0 + beta / (8.0 * dd * (dd + 2.0)) * bracket;
}

LNParams::LNParams(std::vector<double> mean, DenseMatrix covariance, double beta_shape)
    : normal(std::move(mean), std::move(covariance)), beta(beta_shape) {
  const double bmax = beta_max(dim());
  if (!(beta >= 0.0) || !(beta <= bmax)) {
    throw BetaOutOfRange("LNParams: beta = " + std::to_string(beta) +
                         " outside [0, " + std::to_string(bmax) + "]");
  }
}

namespace {
std::vector<double> centered(const std::vector<double>& x, const std::vector<double>& mu) {
  if (x.size() != mu.size()) {
    throw std::invalid_argument("logpdf: observation dimension mismatch");
  }
  std::vector<double> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] - mu[i];
  return c;
}
}  // namespace

double normal_logpdf(const std::vector<double>& x, const MVNormalParams& p) {
  const double d = static_cast<double>(p.dim());
  const double maha = p.chol.quadratic_form(centered(x, p.mu));
  return -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * p.chol.log_determinant() -
         0.5 * maha;
}

double ln_logpdf(const std::vector<double>& x, const LNParams& p) {
  const double maha = p.normal.chol.quadratic_form(centered(x, p.normal.mu));
  const double d = static_cast<double>(p.dim());
  const double base = -0.5 * d * std::log(2.0 * std::numbers::pi) -
                      0.5 * p.normal.chol.log_determinant() - 0.5 * maha;
  const double q = q_factor(maha, p.beta, p.dim());
  // q can only touch zero at the beta = 4d boundary; report -inf rather
  // than letting log() emit NaN for a roundoff-negative value.
  if (!(q > 0.0)) return -std::numeric_limits<double>::infinity();
  return base + std::log(q);
}

namespace {
struct CenteredStats {
  std::vector<double> mean;
  DenseMatrix scatter;  // divisor n
};

CenteredStats scatter_stats(const DenseMatrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n <= d) {
    throw DegenerateGroup("kurtosis: need more observations than dimensions (n > d)");
  }
  CenteredStats st;
  st.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) st.mean[j] += data(i, j);
  }
  for (double& v : st.mean) v /= static_cast<double>(n);
  st.scatter = DenseMatrix(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      const double ca = data(i, a) - st.mean[a];
      for (std::size_t b = a; b < d; ++b) {
        st.scatter(a, b) += ca * (data(i, b) - st.mean[b]);
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      st.scatter(a, b) /= static_cast<double>(n);
      st.scatter(b, a) = st.scatter(a, b);
    }
  }
  return st;
}
}  // namespace

double empirical_excess_kurtosis(const DenseMatrix& data) {
  const CenteredStats st = scatter_stats(data);
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  CholeskyFactor chol = [&] {
    try {
      return CholeskyFactor(st.scatter);
    } catch (const NotPositiveDefinite&) {
      throw DegenerateGroup("kurtosis: singular scatter matrix");
    }
  }();

  double b2 = 0.0;
  std::vector<double> c(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) c[j] = data(i, j) - st.mean[j];
    const double maha = chol.quadratic_form(c);
    b2 += maha * maha;
  }
  b2 /= static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return b2 - dd * (dd + 2.0);
}

MardiaResult mardia_kurtosis_test(const DenseMatrix& data) {
  const double excess = empirical_excess_kurtosis(data);
  const double n = static_cast<double>(data.rows());
  const double d = static_cast<double>(data.cols());
  const double se = std::sqrt(8.0 * d * (d + 2.0) / n);
  MardiaResult r;
  r.excess = excess;
  r.z = excess / se;
  r.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(r.z)));
  return r;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

}  // namespace orthofit
