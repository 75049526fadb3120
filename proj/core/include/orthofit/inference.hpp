#pragma once

// Model comparison: information criteria, chi-square tail probabilities and
// likelihood-ratio tests over the nested model family.

#include <cstddef>
#include <vector>

#include "orthofit/cpc.hpp"

namespace orthofit {

// Both criteria use the "larger is better" convention, so they can be read
// off the same way as the log-likelihood itself.
double aic(double loglik, std::size_t m);
double bic(double loglik, std::size_t m, std::size_t n);

// Upper tail P[X >= x] of a chi-square variable with df degrees of freedom,
// via the regularized incomplete gamma function. Absolute error below 1e-10.
double chi_square_sf(double x, std::size_t df);

// True when a maximum of model `null_spec` is always a restriction of model
// `alt_spec`: the family may only widen (normal -> leptokurtic) and the
// rotation structure may only widen (common -> per-group), and the two specs
// must differ.
bool is_nested(const ModelSpec& null_spec, const ModelSpec& alt_spec);

struct LrTest {
  double statistic = 0.0;  // 2 * (loglik_alt - loglik_null), floored at zero
  std::size_t df = 0;
  double p_value = 1.0;
};

// Throws NotNested when the alternative does not add parameters.
LrTest lr_test(double loglik_null, std::size_t m_null, double loglik_alt,
               std::size_t m_alt);

struct ModelScore {
  ModelSpec spec;
  double loglik = 0.0;
  std::size_t m = 0;
};

struct InformationRow {
  ModelSpec spec;
  double loglik = 0.0;
  std::size_t m = 0;
  double aic = 0.0;
  double bic = 0.0;
};

struct LrRow {
  ModelSpec null_spec;
  ModelSpec alt_spec;
  LrTest test;
};

struct ComparisonReport {
  std::size_t n = 0;
  std::vector<InformationRow> information;  // one row per scored model
  std::vector<LrRow> tests;                 // every nested ordered pair
};

// Assembles the information table and all likelihood-ratio tests between
// nested pairs of the scored models, in a fixed deterministic order.
ComparisonReport build_comparison(const std::vector<ModelScore>& scores,
                                  std::size_t n);

}  // namespace orthofit
