#include "orthofit/factor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "orthofit/errors.hpp"

namespace orthofit {

namespace {

void require_square(const DenseMatrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument(std::string(who) + ": matrix must be square and non-empty");
  }
}

// Euclidean norm of column h restricted to rows h.., with scaling.
double tail_column_norm(const DenseMatrix& w, std::size_t h) {
  double scale = 0.0;
  double ssq = 1.0;
  for (std::size_t i = h; i < w.rows(); ++i) {
    const double av = std::fabs(w(i, h));
    if (av == 0.0) continue;
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

}  // namespace

QrResult qr_decompose(const DenseMatrix& a) {
  require_square(a, "qr_decompose");
  const std::size_t d = a.rows();
  const double threshold = tol::pivot * max_column_norm(a);
  if (threshold == 0.0) {
    throw SingularMatrix("qr_decompose: zero matrix");
  }

  DenseMatrix w = a;
  DenseMatrix q = DenseMatrix::identity(d);
  std::vector<double> v(d, 0.0);

  for (std::size_t h = 0; h + 1 < d; ++h) {
    const double norm = tail_column_norm(w, h);
    if (norm < threshold) {
      throw SingularMatrix("qr_decompose: column became numerically dependent");
    }
    // Reflect column h onto alpha * e_h, with alpha opposing the sign of
    // the leading entry for stability.
    const double alpha = (w(h, h) >= 0.0) ? -norm : norm;
    v[h] = w(h, h) - alpha;
    for (std::size_t i = h + 1; i < d; ++i) v[i] = w(i, h);
    double vtv = 0.0;
    for (std::size_t i = h; i < d; ++i) vtv += v[i] * v[i];
    if (vtv == 0.0) continue;  // column already in place
    const double beta = 2.0 / vtv;

    // W := H W on the trailing block.
    w(h, h) = alpha;
    for (std::size_t i = h + 1; i < d; ++i) w(i, h) = 0.0;
    for (std::size_t j = h + 1; j < d; ++j) {
      double s = 0.0;
      for (std::size_t i = h; i < d; ++i) s += v[i] * w(i, j);
      s *= beta;
      for (std::size_t i = h; i < d; ++i) w(i, j) -= s * v[i];
    }
    // Q := Q H accumulates the product of reflections.
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t l = h; l < d; ++l) s += q(i, l) * v[l];
      s *= beta;
      for (std::size_t l = h; l < d; ++l) q(i, l) -= s * v[l];
    }
  }

  // Flip signs so every diagonal of R is strictly positive.
  for (std::size_t h = 0; h < d; ++h) {
    if (std::fabs(w(h, h)) < threshold) {
      throw SingularMatrix("qr_decompose: vanishing diagonal in R");
    }
    if (w(h, h) < 0.0) {
      for (std::size_t j = h; j < d; ++j) w(h, j) = -w(h, j);
      for (std::size_t i = 0; i < d; ++i) q(i, h) = -q(i, h);
    }
  }

  UpperTriangular r(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) r.set(i, j, w(i, j));
  }
  return QrResult{std::move(q), std::move(r)};
}

PluResult plu_decompose(const DenseMatrix& a) {
  require_square(a, "plu_decompose");
  const std::size_t d = a.rows();
  const double threshold = tol::pivot * max_column_norm(a);
  if (threshold == 0.0) {
    throw SingularMatrix("plu_decompose: zero matrix");
  }

  DenseMatrix w = a;
  std::vector<std::size_t> piv(d);
  std::iota(piv.begin(), piv.end(), 0);

  for (std::size_t h = 0; h < d; ++h) {
    // Largest absolute pivot; strict comparison keeps the smallest row
    // index on ties, so the permutation is reproducible.
    std::size_t best = h;
    double best_val = std::fabs(w(h, h));
    for (std::size_t i = h + 1; i < d; ++i) {
      const double val = std::fabs(w(i, h));
      if (val > best_val) {
        best = i;
        best_val = val;
      }
    }
    if (best_val < threshold) {
      throw SingularMatrix("plu_decompose: pivot below tolerance");
    }
    if (best != h) {
      for (std::size_t j = 0; j < d; ++j) std::swap(w(h, j), w(best, j));
      std::swap(piv[h], piv[best]);
    }
    for (std::size_t i = h + 1; i < d; ++i) {
      w(i, h) /= w(h, h);
      const double m = w(i, h);
      if (m == 0.0) continue;
      for (std::size_t j = h + 1; j < d; ++j) w(i, j) -= m * w(h, j);
    }
  }

  UnitLowerTriangular l(d);
  UpperTriangular u(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) l.set(i, j, w(i, j));
    for (std::size_t j = i; j < d; ++j) u.set(i, j, w(i, j));
  }
  // piv[i] is the original row sitting at position i of L*U, which is
  // exactly the column mapping of the permutation matrix in A = P L U.
  return PluResult{Permutation(std::move(piv)), std::move(l), std::move(u)};
}

UnitLowerTriangular unit_lower_factor(const Permutation& p, const DenseMatrix& a) {
  require_square(a, "unit_lower_factor");
  if (p.order() != a.rows()) {
    throw std::invalid_argument("unit_lower_factor: permutation order mismatch");
  }
  const std::size_t d = a.rows();
  DenseMatrix w = p.apply_transpose(a);
  const double threshold = tol::pivot * max_column_norm(a);
  if (threshold == 0.0) {
    throw SingularMatrix("unit_lower_factor: zero matrix");
  }

  for (std::size_t h = 0; h < d; ++h) {
    if (std::fabs(w(h, h)) < threshold) {
      throw SingularMatrix("unit_lower_factor: pivot below tolerance for fixed permutation");
    }
    for (std::size_t i = h + 1; i < d; ++i) {
      w(i, h) /= w(h, h);
      const double m = w(i, h);
      if (m == 0.0) continue;
      for (std::size_t j = h + 1; j < d; ++j) w(i, j) -= m * w(h, j);
    }
  }

  UnitLowerTriangular l(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) l.set(i, j, w(i, j));
  }
  return l;
}

EigenResult symmetric_eigen(const DenseMatrix& s) {
  require_square(s, "symmetric_eigen");
  const std::size_t d = s.rows();

  const double scale = max_abs(s);
  double asym = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      asym = std::max(asym, std::fabs(s(i, j) - s(j, i)));
    }
  }
  if (scale > 0.0 && asym > tol::symmetry * scale) {
    throw NotSymmetric("symmetric_eigen: matrix is not symmetric within tolerance");
  }

  DenseMatrix a = s;
  // Work on the symmetrized copy so tiny asymmetries cannot bias sweeps.
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = m;
      a(j, i) = m;
    }
  }
  DenseMatrix v = DenseMatrix::identity(d);

  const double total = frobenius_norm(a);
  const double off_target = 1e-14 * std::max(total, 1e-300);
  const int max_sweeps = 64;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) off += a(i, j) * a(i, j);
    }
    off = std::sqrt(2.0 * off);
    if (off <= off_target) break;

    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        const double app = a(p, p);
        const double aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          if (i == p || i == q) continue;
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - sn * aiq;
          a(i, q) = sn * aip + c * aiq;
          a(p, i) = a(i, p);
          a(q, i) = a(i, q);
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - sn * viq;
          v(i, q) = sn * vip + c * viq;
        }
      }
    }
  }

  // Descending eigenvalues; stable sort keeps tied values in sweep order.
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x) > a(y, y);
  });

  EigenResult out;
  out.values.resize(d);
  out.vectors = DenseMatrix(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a(src, src);
    // Orient each eigenvector so its largest-magnitude entry is positive.
    std::size_t arg = 0;
    double best = std::fabs(v(0, src));
    for (std::size_t i = 1; i < d; ++i) {
      const double av = std::fabs(v(i, src));
      if (av > best) {
        best = av;
        arg = i;
      }
    }
    const double flip = (v(arg, src) < 0.0) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i) out.vectors(i, j) = flip * v(i, src);
  }
  return out;
}

std::vector<double> solve_upper_triangular(const UpperTriangular& r,
                                           const std::vector<double>& b) {
  const std::size_t d = r.order();
  if (b.size() != d) {
    throw std::invalid_argument("solve_upper_triangular: length mismatch");
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) scale = std::max(scale, std::fabs(r.at(i, j)));
  }
  const double threshold = tol::pivot * scale;

  std::vector<double> x(d, 0.0);
  for (std::size_t ii = d; ii-- > 0;) {
    const double diag = r.at(ii, ii);
    if (std::fabs(diag) <= threshold) {
      throw SingularMatrix("solve_upper_triangular: diagonal below tolerance");
    }
    double s = b[ii];
    for (std::size_t j = ii + 1; j < d; ++j) s -= r.at(ii, j) * x[j];
    x[ii] = s / diag;
  }
  return x;
}

}  // namespace orthofit
