#pragma once

// Deterministic random generators shared by the test binaries.  Everything
// is seeded explicitly so failures reproduce.

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "orthofit/cpc.hpp"
#include "orthofit/errors.hpp"
#include "orthofit/factor.hpp"
#include "orthofit/matrix.hpp"
#include "orthofit/mvdist.hpp"
#include "orthofit/plr.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline orthofit::DenseMatrix random_gaussian(Rng& rng, std::size_t rows,
                                             std::size_t cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  orthofit::DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

// Haar-ish draw: QR orthogonalization of a Gaussian matrix.
inline orthofit::OrthogonalMatrix random_orthogonal(Rng& rng, std::size_t d) {
  for (;;) {
    try {
      return orthofit::OrthogonalMatrix(
          orthofit::qr_decompose(random_gaussian(rng, d, d)).q);
    } catch (const orthofit::SingularMatrix&) {
      // essentially impossible; redraw
    }
  }
}

inline orthofit::Permutation random_permutation(Rng& rng, std::size_t d) {
  std::vector<std::size_t> mapping(d);
  std::iota(mapping.begin(), mapping.end(), std::size_t{0});
  std::shuffle(mapping.begin(), mapping.end(), rng);
  return orthofit::Permutation(std::move(mapping));
}

inline orthofit::UnitLowerTriangular random_unit_lower(Rng& rng, std::size_t d,
                                                       double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> sub(orthofit::UnitLowerTriangular::packed_size(d));
  for (double& v : sub) v = g(rng);
  return orthofit::UnitLowerTriangular(d, std::move(sub));
}

// Well-conditioned symmetric positive definite matrix.
inline orthofit::DenseMatrix random_spd(Rng& rng, std::size_t d) {
  const orthofit::DenseMatrix g = random_gaussian(rng, d, d);
  orthofit::DenseMatrix s = orthofit::matmul(orthofit::transpose(g), g);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) s(i, j) /= static_cast<double>(d);
    s(i, i) += 0.5;
  }
  return s;
}

// n rows from N(mu, sigma) via the Cholesky factor.
inline orthofit::DenseMatrix sample_normal(Rng& rng, std::size_t n,
                                           const std::vector<double>& mu,
                                           const orthofit::DenseMatrix& sigma) {
  const std::size_t d = mu.size();
  const orthofit::CholeskyFactor chol(sigma);
  std::normal_distribution<double> g(0.0, 1.0);
  orthofit::DenseMatrix out(n, d);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < d; ++h) z[h] = g(rng);
    for (std::size_t a = 0; a < d; ++a) {
      double v = mu[a];
      for (std::size_t b = 0; b <= a; ++b) v += chol.lower()(a, b) * z[b];
      out(i, a) = v;
    }
  }
  return out;
}

// Scale mixture of normals: with probability p_inflate the draw's covariance
// is inflated, which makes the sample leptokurtic.
inline orthofit::DenseMatrix sample_heavy(Rng& rng, std::size_t n,
                                          const std::vector<double>& mu,
                                          const orthofit::DenseMatrix& sigma,
                                          double p_inflate = 0.25,
                                          double inflate = 3.0) {
  orthofit::DenseMatrix inflated = sigma;
  for (double& v : inflated.data()) v *= inflate;
  const orthofit::DenseMatrix base = sample_normal(rng, n, mu, sigma);
  const orthofit::DenseMatrix wide = sample_normal(rng, n, mu, inflated);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  orthofit::DenseMatrix out(n, mu.size());
  for (std::size_t i = 0; i < n; ++i) {
    const bool pick_wide = u(rng) < p_inflate;
    for (std::size_t c = 0; c < mu.size(); ++c) {
      out(i, c) = pick_wide ? wide(i, c) : base(i, c);
    }
  }
  return out;
}

struct SyntheticSpec {
  std::size_t d = 2;
  std::size_t k = 2;
  std::size_t n_per_group = 60;
  bool shared_rotation = true;  // common eigenvectors across groups
  bool heavy_tails = false;
};

// Grouped dataset drawn from per-group covariances built as Q_j L_j Q_j'.
inline orthofit::GroupedDataset synthetic_dataset(Rng& rng, const SyntheticSpec& spec) {
  const std::size_t d = spec.d;
  std::uniform_real_distribution<double> lam(0.3, 3.0);
  std::uniform_real_distribution<double> mean(-2.0, 2.0);

  const orthofit::OrthogonalMatrix shared = random_orthogonal(rng, d);
  std::vector<std::string> names;
  std::vector<orthofit::DenseMatrix> groups;
  for (std::size_t j = 0; j < spec.k; ++j) {
    const orthofit::OrthogonalMatrix qj =
        spec.shared_rotation ? shared : random_orthogonal(rng, d);
    orthofit::DenseMatrix sigma(d, d);
    std::vector<double> lambdas(d);
    for (double& v : lambdas) v = lam(rng);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        double s = 0.0;
        for (std::size_t h = 0; h < d; ++h) s += qj(a, h) * lambdas[h] * qj(b, h);
        sigma(a, b) = s;
      }
    }
    std::vector<double> mu(d);
    for (double& v : mu) v = mean(rng);
    names.push_back("g" + std::to_string(j));
    groups.push_back(spec.heavy_tails
                         ? sample_heavy(rng, spec.n_per_group, mu, sigma)
                         : sample_normal(rng, spec.n_per_group, mu, sigma));
  }
  return orthofit::GroupedDataset(std::move(names), std::move(groups));
}

// Largest deviation of |A| from a permutation-with-signs pattern: every
// entry must be near 0 or near 1.  Used to compare two rotations that may
// differ by column order and signs.
inline double sign_permutation_defect(const orthofit::DenseMatrix& a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double v = std::fabs(a(i, j));
      worst = std::max(worst, std::min(v, std::fabs(v - 1.0)));
    }
  }
  return worst;
}

}  // namespace testsupport
