#include "orthofit/cpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "orthofit/errors.hpp"
#include "orthofit/factor.hpp"

namespace orthofit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log2pi() { return std::log(2.0 * std::numbers::pi); }

bool positive_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x) || !(x > 0.0)) return false;
  }
  return true;
}

// Overflow-safe logistic.
double sigmoid(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

GroupedDataset::GroupedDataset(std::vector<std::string> names,
                               std::vector<DenseMatrix> groups)
    : names_(std::move(names)), groups_(std::move(groups)) {
  if (groups_.empty() || names_.size() != groups_.size()) {
    throw std::invalid_argument("GroupedDataset: need matching names and groups");
  }
  const std::size_t dim = groups_.front().cols();
  if (dim == 0) {
    throw std::invalid_argument("GroupedDataset: zero-dimensional data");
  }
  for (std::size_t j = 0; j < groups_.size(); ++j) {
    if (groups_[j].cols() != dim) {
      throw std::invalid_argument("GroupedDataset: groups disagree on dimension");
    }
    if (groups_[j].rows() < dim + 1) {
      throw DegenerateGroup("group '" + names_[j] + "' has " +
                            std::to_string(groups_[j].rows()) +
                            " observations, needs at least " + std::to_string(dim + 1));
    }
  }
}

std::size_t GroupedDataset::n_total() const {
  std::size_t n = 0;
  for (const auto& g : groups_) n += g.rows();
  return n;
}

std::vector<GroupStats> group_stats(const GroupedDataset& data) {
  const std::size_t d = data.d();
  std::vector<GroupStats> stats;
  stats.reserve(data.k());
  for (std::size_t j = 0; j < data.k(); ++j) {
    const DenseMatrix& g = data.group(j);
    const std::size_t nj = g.rows();
    GroupStats st;
    st.n = nj;
    st.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < nj; ++i) {
      for (std::size_t c = 0; c < d; ++c) st.mean[c] += g(i, c);
    }
    for (double& v : st.mean) v /= static_cast<double>(nj);
    st.scatter = DenseMatrix(d, d);
    for (std::size_t i = 0; i < nj; ++i) {
      for (std::size_t a = 0; a < d; ++a) {
        const double ca = g(i, a) - st.mean[a];
        for (std::size_t b = a; b < d; ++b) {
          st.scatter(a, b) += ca * (g(i, b) - st.mean[b]);
        }
      }
    }
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) {
        st.scatter(a, b) /= static_cast<double>(nj);
        st.scatter(b, a) = st.scatter(a, b);
      }
    }
    try {
      CholeskyFactor probe(st.scatter);
      (void)probe;
    } catch (const NotPositiveDefinite&) {
      throw DegenerateGroup("group '" + data.name(j) + "' has a singular scatter matrix");
    }
    stats.push_back(std::move(st));
  }
  return stats;
}

std::string model_name(const ModelSpec& spec) {
  const bool ln = spec.family == ModelFamily::LeptokurticNormal;
  const bool cpc = spec.structure == ModelStructure::Cpc;
  if (cpc) return ln ? "ln-cpc" : "n-cpc";
  return ln ? "ln-pc" : "n-pc";
}

std::optional<ModelSpec> parse_model_name(const std::string& name) {
  if (name == "n-cpc") return ModelSpec{ModelFamily::Normal, ModelStructure::Cpc};
  if (name == "ln-cpc") return ModelSpec{ModelFamily::LeptokurticNormal, ModelStructure::Cpc};
  if (name == "n-pc") return ModelSpec{ModelFamily::Normal, ModelStructure::Unconstrained};
  if (name == "ln-pc")
    return ModelSpec{ModelFamily::LeptokurticNormal, ModelStructure::Unconstrained};
  return std::nullopt;
}

std::size_t param_count(const ModelSpec& spec, std::size_t d, std::size_t k) {
  const std::size_t means = k * d;
  const std::size_t rotations = (spec.structure == ModelStructure::Cpc)
                                    ? d * (d - 1) / 2
                                    : k * d * (d - 1) / 2;
  const std::size_t eigenvalues = k * d;
  const std::size_t shapes = (spec.family == ModelFamily::LeptokurticNormal) ? k : 0;
  return means + rotations + eigenvalues + shapes;
}

namespace {

const OrthogonalMatrix& rotation_of(const ParamSet& p, std::size_t j) {
  return (p.spec.structure == ModelStructure::Cpc) ? p.q[0] : p.q[j];
}

}  // namespace

DenseMatrix fitted_sigma(const ParamSet& params, std::size_t j) {
  const DenseMatrix& q = rotation_of(params, j).matrix();
  const std::size_t d = q.rows();
  DenseMatrix sigma(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      double s = 0.0;
      for (std::size_t h = 0; h < d; ++h) {
        s += q(a, h) * params.lambda[j][h] * q(b, h);
      }
      sigma(a, b) = s;
      sigma(b, a) = s;
    }
  }
  return sigma;
}

double loglik_ncpc(const ParamSet& params, const std::vector<GroupStats>& stats) {
  const std::size_t d = params.d;
  const std::size_t k = params.k;
  if (params.spec.structure != ModelStructure::Cpc ||
      params.spec.family != ModelFamily::Normal) {
    throw std::invalid_argument("loglik_ncpc: parameter set is not a normal CPC point");
  }
  if (stats.size() != k) {
    throw std::invalid_argument("loglik_ncpc: stats size mismatch");
  }
  const DenseMatrix& q = params.q[0].matrix();

  std::size_t n = 0;
  for (const auto& st : stats) n += st.n;

  double total = -0.5 * static_cast<double>(n * d) * log2pi();
  std::vector<double> qc(d);
  for (std::size_t j = 0; j < k; ++j) {
    const std::vector<double>& lam = params.lambda[j];
    if (!positive_finite(lam)) return kNegInf;

    // Scatter about mu_j via the shift identity
    // S_j(mu) = S_j(mean) + (mean - mu)(mean - mu)'.
    std::vector<double> c(d);
    for (std::size_t a = 0; a < d; ++a) c[a] = stats[j].mean[a] - params.mu[j][a];

    double sum_ln = 0.0;
    double trace = 0.0;
    for (std::size_t h = 0; h < d; ++h) {
      sum_ln += std::log(lam[h]);
      double qsq = 0.0;  // q_h' S_j q_h
      double qdotc = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        double sq = 0.0;
        for (std::size_t b = 0; b < d; ++b) sq += stats[j].scatter(a, b) * q(b, h);
        qsq += q(a, h) * sq;
        qdotc += q(a, h) * c[a];
      }
      trace += (qsq + qdotc * qdotc) / lam[h];
    }
    total += -0.5 * static_cast<double>(stats[j].n) * (sum_ln + trace);
  }
  return total;
}

namespace {

// Per-observation evaluation shared by the leptokurtic likelihoods and
// the unconstrained structure.
double loglik_by_observation(const ParamSet& params, const GroupedDataset& data) {
  const std::size_t d = params.d;
  const std::size_t k = params.k;
  const bool leptokurtic = params.spec.family == ModelFamily::LeptokurticNormal;

  double total = 0.0;
  std::vector<double> y(d);
  for (std::size_t j = 0; j < k; ++j) {
    const std::vector<double>& lam = params.lambda[j];
    if (!positive_finite(lam)) return kNegInf;
    const DenseMatrix& q = rotation_of(params, j).matrix();
    const DenseMatrix& g = data.group(j);
    const std::size_t nj = g.rows();
    const double beta = leptokurtic ? params.beta[j] : 0.0;

    double sum_ln = 0.0;
    for (std::size_t h = 0; h < d; ++h) sum_ln += std::log(lam[h]);

    double sum_maha = 0.0;
    double sum_lnq = 0.0;
    for (std::size_t i = 0; i < nj; ++i) {
      for (std::size_t h = 0; h < d; ++h) {
        double s = 0.0;
        for (std::size_t a = 0; a < d; ++a) s += q(a, h) * (g(i, a) - params.mu[j][a]);
        y[h] = s;
      }
      double maha = 0.0;
      for (std::size_t h = 0; h < d; ++h) maha += y[h] * y[h] / lam[h];
      sum_maha += maha;
      if (leptokurtic) {
        const double qv = q_factor(maha, beta, d);
        if (!(qv > 0.0)) return kNegInf;
        sum_lnq += std::log(qv);
      }
    }
    total += -0.5 * static_cast<double>(nj * d) * log2pi() -
             0.5 * static_cast<double>(nj) * sum_ln - 0.5 * sum_maha + sum_lnq;
  }
  return total;
}

}  // namespace

double loglik_lncpc(const ParamSet& params, const GroupedDataset& data) {
  if (params.spec.structure != ModelStructure::Cpc ||
      params.spec.family != ModelFamily::LeptokurticNormal) {
    throw std::invalid_argument("loglik_lncpc: parameter set is not a leptokurtic CPC point");
  }
  return loglik_by_observation(params, data);
}

double loglik_unconstrained(const ParamSet& params, const GroupedDataset& data) {
  if (params.spec.structure != ModelStructure::Unconstrained) {
    throw std::invalid_argument("loglik_unconstrained: parameter set is not unconstrained");
  }
  return loglik_by_observation(params, data);
}

namespace {

std::size_t coordinate_count(const ModelSpec& spec, std::size_t d, std::size_t k) {
  return param_count(spec, d, k);  // one coordinate per free parameter
}

}  // namespace

std::vector<double> to_unconstrained(const ParamSet& params) {
  const std::size_t d = params.d;
  const std::size_t k = params.k;
  std::vector<double> v;
  v.reserve(coordinate_count(params.spec, d, k));

  for (std::size_t j = 0; j < k; ++j) {
    v.insert(v.end(), params.mu[j].begin(), params.mu[j].end());
  }
  for (std::size_t i = 0; i < params.q.size(); ++i) {
    const UnitLowerTriangular l =
        unit_lower_factor(params.p_frozen[i], params.q[i].matrix());
    const std::vector<double> packed = pack(l);
    v.insert(v.end(), packed.begin(), packed.end());
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (!positive_finite(params.lambda[j])) {
      throw std::invalid_argument("to_unconstrained: eigenvalues must be positive");
    }
    for (double lam : params.lambda[j]) v.push_back(std::log(lam));
  }
  if (params.spec.family == ModelFamily::LeptokurticNormal) {
    const double bmax = beta_max(d);
    for (std::size_t j = 0; j < k; ++j) {
      const double b = params.beta[j];
      if (!(b > 0.0) || !(b < bmax)) {
        throw BetaOnBoundary("to_unconstrained: beta[" + std::to_string(j) +
                             "] = " + std::to_string(b) +
                             " has no finite logit coordinate");
      }
      v.push_back(std::log(b / (bmax - b)));
    }
  }
  return v;
}

ParamSet from_unconstrained(const std::vector<double>& v, const ParamSet& tmpl) {
  const std::size_t d = tmpl.d;
  const std::size_t k = tmpl.k;
  const std::size_t expected = coordinate_count(tmpl.spec, d, k);
  if (v.size() != expected) {
    throw LengthMismatch("from_unconstrained: expected " + std::to_string(expected) +
                         " coordinates, got " + std::to_string(v.size()));
  }

  ParamSet out;
  out.spec = tmpl.spec;
  out.d = d;
  out.k = k;

  std::size_t pos = 0;
  out.mu.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.mu.emplace_back(v.begin() + pos, v.begin() + pos + d);
    pos += d;
  }

  const std::size_t block = UnitLowerTriangular::packed_size(d);
  out.q.reserve(tmpl.q.size());
  out.p_frozen.reserve(tmpl.q.size());
  for (std::size_t i = 0; i < tmpl.q.size(); ++i) {
    const std::vector<double> packed(v.begin() + pos, v.begin() + pos + block);
    pos += block;
    out.p_frozen.push_back(tmpl.p_frozen[i]);
    out.q.push_back(plr_compose(tmpl.p_frozen[i], unpack(d, packed)));
  }

  out.lambda.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> lam(d);
    for (std::size_t h = 0; h < d; ++h) lam[h] = std::exp(v[pos + h]);
    out.lambda.push_back(std::move(lam));
    pos += d;
  }

  if (tmpl.spec.family == ModelFamily::LeptokurticNormal) {
    const double bmax = beta_max(d);
    out.beta.reserve(k);
    for (std::size_t j = 0; j < k; ++j) out.beta.push_back(bmax * sigmoid(v[pos + j]));
    pos += k;
  }
  return out;
}

InitResult initialize(const GroupedDataset& data, const ModelSpec& spec) {
  const std::vector<GroupStats> stats = group_stats(data);
  const std::size_t d = data.d();
  const std::size_t k = data.k();
  const std::size_t n = data.n_total();

  InitResult init;
  init.params.spec = spec;
  init.params.d = d;
  init.params.k = k;
  for (const auto& st : stats) init.params.mu.push_back(st.mean);

  // Canonicalize a rotation through its own coordinates: after one
  // decompose/compose pass the packed entries reproduce the stored
  // matrix exactly (the pass only normalizes column signs, which the
  // likelihood cannot see).
  auto adopt = [&](const DenseMatrix& eigenvectors) {
    OrthogonalMatrix raw{eigenvectors};
    PLRFactors f = plr_decompose(raw);
    init.params.q.push_back(plr_compose(f.p, f.l));
    init.params.p_frozen.push_back(f.p);
  };

  if (spec.structure == ModelStructure::Cpc) {
    DenseMatrix pooled(d, d);
    for (std::size_t j = 0; j < k; ++j) {
      const double w = static_cast<double>(stats[j].n) / static_cast<double>(n);
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) pooled(a, b) += w * stats[j].scatter(a, b);
      }
    }
    adopt(symmetric_eigen(pooled).vectors);
  } else {
    for (std::size_t j = 0; j < k; ++j) {
      adopt(symmetric_eigen(stats[j].scatter).vectors);
    }
  }

  for (std::size_t j = 0; j < k; ++j) {
    const DenseMatrix& q = rotation_of(init.params, j).matrix();
    std::vector<double> lam(d);
    for (std::size_t h = 0; h < d; ++h) {
      double s = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < d; ++b) row += stats[j].scatter(a, b) * q(b, h);
        s += q(a, h) * row;
      }
      lam[h] = s;
    }
    init.params.lambda.push_back(std::move(lam));
  }

  if (spec.family == ModelFamily::LeptokurticNormal) {
    const double bmax = beta_max(d);
    for (std::size_t j = 0; j < k; ++j) {
      const double excess = empirical_excess_kurtosis(data.group(j));
      const double clamped = std::clamp(excess, 0.01, bmax - 0.01);
      init.params.beta.push_back(clamped);
      init.beta_clamped.push_back(clamped != excess);
    }
  }
  return init;
}

namespace {

FitResult fit_normal_unconstrained(const GroupedDataset& data,
                                   const std::vector<GroupStats>& stats) {
  // Saturated Gaussian model: sample means and per-group eigenpairs are
  // the exact maximum likelihood estimates, no iteration involved.
  ParamSet params;
  params.spec = ModelSpec{ModelFamily::Normal, ModelStructure::Unconstrained};
  params.d = data.d();
  params.k = data.k();
  for (std::size_t j = 0; j < data.k(); ++j) {
    const EigenResult eig = symmetric_eigen(stats[j].scatter);
    OrthogonalMatrix raw{eig.vectors};
    PLRFactors f = plr_decompose(raw);
    params.q.push_back(plr_compose(f.p, f.l));
    params.p_frozen.push_back(f.p);
    params.mu.push_back(stats[j].mean);
    params.lambda.push_back(eig.values);
  }

  FitResult out;
  out.params = std::move(params);
  out.loglik = loglik_unconstrained(out.params, data);
  out.m = param_count(out.params.spec, data.d(), data.k());
  out.n = data.n_total();
  out.optim.x_opt = {};
  out.optim.f_opt = out.loglik;
  out.optim.iterations = 0;
  out.optim.converged = true;
  return out;
}

FitResult fit_by_optimizer(const GroupedDataset& data, const ModelSpec& spec,
                           const FitOptions& opts) {
  const std::vector<GroupStats> stats = group_stats(data);
  InitResult init = initialize(data, spec);
  const std::vector<double> v0 = to_unconstrained(init.params);

  const bool normal = spec.family == ModelFamily::Normal;
  Objective objective = [&](const std::vector<double>& v) -> double {
    for (double x : v) {
      if (!std::isfinite(x)) return kNegInf;
    }
    try {
      const ParamSet p = from_unconstrained(v, init.params);
      return normal ? loglik_ncpc(p, stats) : loglik_by_observation(p, data);
    } catch (const Error&) {
      return kNegInf;  // e.g. numerically dependent columns far out in L
    }
  };

  OptimizerConfig base;
  base.f_tol = opts.f_tol;
  base.x_tol = opts.x_tol;
  base.restarts = opts.restarts;

  std::optional<OptimResult> nm;
  if (opts.driver != FitOptions::Driver::BfgsOnly) {
    OptimizerConfig cfg = base;
    cfg.method = OptimMethod::NelderMead;
    cfg.max_iter = opts.nm_max_iter;
    nm = maximize(objective, v0, cfg);
  }
  std::optional<OptimResult> bf;
  if (opts.driver != FitOptions::Driver::NelderMeadOnly) {
    OptimizerConfig cfg = base;
    cfg.method = OptimMethod::Bfgs;
    cfg.max_iter = opts.bfgs_max_iter;
    bf = maximize(objective, nm ? nm->x_opt : v0, cfg);
  }

  OptimResult best;
  if (nm && bf) {
    best = (bf->f_opt >= nm->f_opt) ? *bf : *nm;
    best.iterations = nm->iterations + bf->iterations;
    best.converged = nm->converged || bf->converged;
    best.gradient_norm = bf->gradient_norm;
  } else {
    best = nm ? *nm : *bf;
  }

  FitResult out;
  out.params = from_unconstrained(best.x_opt, init.params);
  out.loglik = best.f_opt;
  out.m = param_count(spec, data.d(), data.k());
  out.n = data.n_total();
  out.optim = std::move(best);
  out.beta_clamped = init.beta_clamped;
  if (spec.structure == ModelStructure::Cpc) {
    out.stationarity_residual = fg_stationarity_residual(out.params.q[0], stats);
  }
  return out;
}

FitResult fit_leptokurtic_unconstrained(const GroupedDataset& data,
                                        const FitOptions& opts) {
  // The likelihood separates over groups; each group is a k = 1 fit.
  ParamSet params;
  params.spec = ModelSpec{ModelFamily::LeptokurticNormal, ModelStructure::Unconstrained};
  params.d = data.d();
  params.k = data.k();

  FitResult out;
  out.optim.converged = true;
  double gradient_norm = 0.0;
  bool have_gradient = false;
  for (std::size_t j = 0; j < data.k(); ++j) {
    GroupedDataset sub({data.name(j)}, {data.group(j)});
    const ModelSpec sub_spec{ModelFamily::LeptokurticNormal, ModelStructure::Cpc};
    FitResult part = fit_by_optimizer(sub, sub_spec, opts);

    params.mu.push_back(part.params.mu[0]);
    params.q.push_back(part.params.q[0]);
    params.p_frozen.push_back(part.params.p_frozen[0]);
    params.lambda.push_back(part.params.lambda[0]);
    params.beta.push_back(part.params.beta[0]);
    out.beta_clamped.push_back(!part.beta_clamped.empty() && part.beta_clamped[0]);

    out.loglik += part.loglik;
    out.optim.iterations += part.optim.iterations;
    out.optim.converged = out.optim.converged && part.optim.converged;
    if (part.optim.gradient_norm) {
      gradient_norm = std::max(gradient_norm, *part.optim.gradient_norm);
      have_gradient = true;
    }
  }
  out.params = std::move(params);
  out.m = param_count(out.params.spec, data.d(), data.k());
  out.n = data.n_total();
  out.optim.f_opt = out.loglik;
  if (have_gradient) out.optim.gradient_norm = gradient_norm;
  return out;
}

}  // namespace

FitResult fit(const GroupedDataset& data, const ModelSpec& spec, const FitOptions& opts) {
  if (spec.structure == ModelStructure::Unconstrained) {
    if (spec.family == ModelFamily::Normal) {
      return fit_normal_unconstrained(data, group_stats(data));
    }
    return fit_leptokurtic_unconstrained(data, opts);
  }
  return fit_by_optimizer(data, spec, opts);
}

double fg_stationarity_residual(const OrthogonalMatrix& q,
                                const std::vector<GroupStats>& stats) {
  const std::size_t d = q.order();
  const std::size_t k = stats.size();
  if (k == 0) {
    throw std::invalid_argument("fg_stationarity_residual: no groups");
  }

  // T_j = Q' S_j Q holds both the projected eigenvalues (diagonal) and
  // the cross terms q_h' S_j q_l (off-diagonal).
  std::vector<DenseMatrix> t;
  t.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    t.push_back(matmul(transpose(q.matrix()), matmul(stats[j].scatter, q.matrix())));
  }

  double residual = 0.0;
  for (std::size_t h = 0; h < d; ++h) {
    for (std::size_t l = h + 1; l < d; ++l) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double lh = t[j](h, h);
        const double ll = t[j](l, l);
        acc += static_cast<double>(stats[j].n) * (lh - ll) / (lh * ll) * t[j](h, l);
      }
      residual = std::max(residual, std::fabs(acc));
    }
  }
  return residual;
}

FgResult fg_algorithm(const std::vector<GroupStats>& stats, std::size_t max_sweeps) {
  if (stats.empty()) {
    throw std::invalid_argument("fg_algorithm: no groups");
  }
  const std::size_t d = stats.front().scatter.rows();
  const std::size_t k = stats.size();

  std::size_t n = 0;
  for (const auto& st : stats) n += st.n;
  DenseMatrix pooled(d, d);
  for (std::size_t j = 0; j < k; ++j) {
    const double w = static_cast<double>(stats[j].n) / static_cast<double>(n);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) pooled(a, b) += w * stats[j].scatter(a, b);
    }
  }
  DenseMatrix b = symmetric_eigen(pooled).vectors;

  const double sweep_tol = 1e-10;
  const double inner_tol = 1e-12;
  const std::size_t inner_max = 50;

  std::vector<double> sh(d), sl(d);
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_angle = 0.0;
    for (std::size_t h = 0; h + 1 < d; ++h) {
      for (std::size_t l = h + 1; l < d; ++l) {
        // Project every scatter onto the (h, l) column plane.
        std::vector<double> t11(k), t12(k), t22(k);
        for (std::size_t j = 0; j < k; ++j) {
          for (std::size_t a = 0; a < d; ++a) {
            double ah = 0.0, al = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              ah += stats[j].scatter(a, c) * b(c, h);
              al += stats[j].scatter(a, c) * b(c, l);
            }
            sh[a] = ah;
            sl[a] = al;
          }
          double a11 = 0.0, a12 = 0.0, a22 = 0.0;
          for (std::size_t a = 0; a < d; ++a) {
            a11 += b(a, h) * sh[a];
            a12 += b(a, h) * sl[a];
            a22 += b(a, l) * sl[a];
          }
          t11[j] = a11;
          t12[j] = a12;
          t22[j] = a22;
        }

        // Fixed point on the rotation angle of the 2x2 subproblem.
        double theta = 0.0;
        for (std::size_t it = 0; it < inner_max; ++it) {
          const double c = std::cos(theta);
          const double s = std::sin(theta);
          double m11 = 0.0, m12 = 0.0, m22 = 0.0;
          double scale = 0.0;
          for (std::size_t j = 0; j < k; ++j) {
            const double d1 = c * c * t11[j] + 2.0 * c * s * t12[j] + s * s * t22[j];
            const double d2 = s * s * t11[j] - 2.0 * c * s * t12[j] + c * c * t22[j];
            if (!(d1 > 0.0) || !(d2 > 0.0)) {
              throw DegenerateGroup("fg_algorithm: non-positive projected variance");
            }
            const double w = static_cast<double>(stats[j].n) * (d1 - d2) / (d1 * d2);
            m11 += w * t11[j];
            m12 += w * t12[j];
            m22 += w * t22[j];
            scale += static_cast<double>(stats[j].n) *
                     (std::fabs(t11[j]) + std::fabs(t22[j]));
          }
          // All groups agree in this plane: nothing to rotate.
          if (std::fabs(m11) + std::fabs(m22) + 2.0 * std::fabs(m12) <= 1e-15 * scale) {
            break;
          }
          // Eigendirections of M sit at phi and phi + pi/2; move to the
          // one nearest the current angle.
          const double phi = 0.5 * std::atan2(2.0 * m12, m11 - m22);
          double delta = phi - theta;
          while (delta > std::numbers::pi / 4.0) delta -= std::numbers::pi / 2.0;
          while (delta < -std::numbers::pi / 4.0) delta += std::numbers::pi / 2.0;
          theta += delta;
          if (std::fabs(delta) < inner_tol) break;
        }

        if (theta != 0.0) {
          const double c = std::cos(theta);
          const double s = std::sin(theta);
          for (std::size_t a = 0; a < d; ++a) {
            const double bh = b(a, h);
            const double bl = b(a, l);
            b(a, h) = c * bh + s * bl;
            b(a, l) = -s * bh + c * bl;
          }
        }
        max_angle = std::max(max_angle, std::fabs(theta));
      }
    }

    if (max_angle < sweep_tol) {
      FgResult out{OrthogonalMatrix(b), {}, sweep};
      for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> lam(d);
        for (std::size_t h = 0; h < d; ++h) {
          double s = 0.0;
          for (std::size_t a = 0; a < d; ++a) {
            double row = 0.0;
            for (std::size_t c = 0; c < d; ++c) row += stats[j].scatter(a, c) * b(c, h);
            s += b(a, h) * row;
          }
          lam[h] = s;
        }
        out.lambda.push_back(std::move(lam));
      }
      return out;
    }
  }
  throw NoConvergence("fg_algorithm: no convergence within " +
                      std::to_string(max_sweeps) + " sweeps");
}

}  // namespace orthofit
