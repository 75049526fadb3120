#include "orthofit/inference.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "orthofit/errors.hpp"

namespace orthofit {

double aic(double loglik, std::size_t m) {
  return 2.0 * loglik - 2.0 * static_cast<double>(m);
}

double bic(double loglik, std::size_t m, std::size_t n) {
  return 2.0 * loglik - static_cast<double>(m) * std::log(static_cast<double>(n));
}

namespace {

// Regularized lower incomplete gamma P(a, x) by its power series; valid and
// fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by a modified Lentz continued
// fraction; valid and fast for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double chi_square_sf(double x, std::size_t df) {
  if (df == 0) {
    throw std::invalid_argument("chi_square_sf: zero degrees of freedom");
  }
  if (!std::isfinite(x)) {
    throw std::invalid_argument("chi_square_sf: non-finite statistic");
  }
  if (x <= 0.0) return 1.0;
  const double a = 0.5 * static_cast<double>(df);
  const double z = 0.5 * x;
  if (z < a + 1.0) return 1.0 - gamma_p_series(a, z);
  return gamma_q_fraction(a, z);
}

bool is_nested(const ModelSpec& null_spec, const ModelSpec& alt_spec) {
  if (null_spec == alt_spec) return false;
  const bool family_ok =
      null_spec.family == alt_spec.family || null_spec.family == ModelFamily::Normal;
  const bool structure_ok = null_spec.structure == alt_spec.structure ||
                            null_spec.structure == ModelStructure::Cpc;
  return family_ok && structure_ok;
}

LrTest lr_test(double loglik_null, std::size_t m_null, double loglik_alt,
               std::size_t m_alt) {
  if (m_alt <= m_null) {
    throw NotNested("lr_test: alternative has " + std::to_string(m_alt) +
                    " parameters, null has " + std::to_string(m_null));
  }
  LrTest out;
  out.df = m_alt - m_null;
  out.statistic = 2.0 * (loglik_alt - loglik_null);
  if (out.statistic < 0.0) out.statistic = 0.0;  // optimizer noise on a true nest
  out.p_value = chi_square_sf(out.statistic, out.df);
  return out;
}

ComparisonReport build_comparison(const std::vector<ModelScore>& scores,
                                  std::size_t n) {
  ComparisonReport report;
  report.n = n;
  for (const auto& s : scores) {
    InformationRow row;
    row.spec = s.spec;
    row.loglik = s.loglik;
    row.m = s.m;
    row.aic = aic(s.loglik, s.m);
    row.bic = bic(s.loglik, s.m, n);
    report.information.push_back(row);
  }
  for (const auto& null_score : scores) {
    for (const auto& alt_score : scores) {
      if (!is_nested(null_score.spec, alt_score.spec)) continue;
      LrRow row;
      row.null_spec = null_score.spec;
      row.alt_spec = alt_score.spec;
      row.test = lr_test(null_score.loglik, null_score.m, alt_score.loglik,
                         alt_score.m);
      report.tests.push_back(row);
    }
  }
  return report;
}

}  // namespace orthofit
