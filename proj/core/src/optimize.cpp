#include "orthofit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "orthofit/errors.hpp"

namespace orthofit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Non-finite objective values become -inf so a bad step simply loses
// every comparison instead of poisoning the state.
double guarded(const Objective& f, const std::vector<double>& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kNegInf;
}

struct RoundResult {
  std::vector<double> x;
  double f = kNegInf;
  std::size_t iterations = 0;
  bool converged = false;
  std::optional<double> gradient_norm;
};

RoundResult nelder_mead_round(const Objective& f, const std::vector<double>& x0,
                              double f0, const OptimizerConfig& cfg) {
  const std::size_t n = x0.size();
  const double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;

  std::vector<std::vector<double>> v(n + 1, x0);
  std::vector<double> fv(n + 1);
  fv[0] = f0;
  for (std::size_t h = 0; h < n; ++h) {
    v[h + 1][h] += std::max(0.05 * std::fabs(x0[h]), 0.001);
    fv[h + 1] = guarded(f, v[h + 1]);
  }

  // Index order, best (largest f) first; stable so ties are deterministic.
  std::vector<std::size_t> ord(n + 1);
  auto reorder = [&] {
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] > fv[b]; });
  };

  RoundResult out;
  std::size_t iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    reorder();
    const std::size_t best = ord[0], worst = ord[n], second = ord[n - 1];

    const double spread = fv[best] - fv[worst];
    double width = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t h = 0; h < n; ++h) {
        width = std::max(width, std::fabs(v[ord[i]][h] - v[best][h]));
      }
    }
    if (spread < cfg.f_tol || width < cfg.x_tol) {
      out.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t h = 0; h < n; ++h) centroid[h] += v[i][h];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t h = 0; h < n; ++h) x[h] = centroid[h] + t * (centroid[h] - v[worst][h]);
      return x;
    };

    const std::vector<double> xr = along(reflect);
    const double fr = guarded(f, xr);

    if (fr > fv[best]) {
      const std::vector<double> xe = along(expand);
      const double fe = guarded(f, xe);
      if (fe > fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr > fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr > fv[worst];
      const std::vector<double> xc = along(outside ? contract : -contract);
      const double fc = guarded(f, xc);
      if ((outside && fc >= fr) || (!outside && fc > fv[worst])) {
        v[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t h = 0; h < n; ++h) {
            v[i][h] = v[best][h] + shrink * (v[i][h] - v[best][h]);
          }
          fv[i] = guarded(f, v[i]);
        }
      }
    }
  }

  reorder();
  out.x = v[ord[0]];
  out.f = fv[ord[0]];
  out.iterations = iter;
  return out;
}

// Gradient used inside BFGS: central differences with a per-coordinate
// step 1e-6 * max(1, |x_h|).  Returns nullopt when a stencil point stays
// non-finite after one halving, which ends the BFGS round gracefully.
std::optional<std::vector<double>> bfgs_gradient(const Objective& f,
                                                 const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> g(n);
  std::vector<double> xp = x;
  for (std::size_t h = 0; h < n; ++h) {
    double step = 1e-6 * std::max(1.0, std::fabs(x[h]));
    bool done = false;
    for (int attempt = 0; attempt < 2 && !done; ++attempt) {
      xp[h] = x[h] + step;
      const double fp = f(xp);
      xp[h] = x[h] - step;
      const double fm = f(xp);
      xp[h] = x[h];
      if (std::isfinite(fp) && std::isfinite(fm)) {
        g[h] = (fp - fm) / (2.0 * step);
        done = true;
      } else {
        step *= 0.5;
      }
    }
    if (!done) return std::nullopt;
  }
  return g;
}

RoundResult bfgs_round(const Objective& f, const std::vector<double>& x0, double f0,
                       const OptimizerConfig& cfg) {
  const std::size_t n = x0.size();
  const double c1 = 1e-4;

  RoundResult out;
  out.x = x0;
  out.f = f0;

  // Inverse Hessian estimate for the equivalent minimization of -f.
  std::vector<double> hinv(n * n, 0.0);
  auto reset_h = [&] {
    std::fill(hinv.begin(), hinv.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;
  };
  reset_h();

  auto grad_opt = bfgs_gradient(f, out.x);
  if (!grad_opt) return out;
  std::vector<double> g = *grad_opt;  // gradient of f (ascent direction source)

  std::size_t iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    double gnorm = 0.0;
    for (double v : g) gnorm = std::max(gnorm, std::fabs(v));
    out.gradient_norm = gnorm;
    if (gnorm < cfg.f_tol) {
      out.converged = true;
      break;
    }

    // p = H * g ascends f; fall back to steepest ascent when curvature
    // information has gone bad.
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += hinv[i * n + j] * g[j];
      p[i] = s;
    }
    double slope = 0.0;  // directional derivative of f along p
    for (std::size_t i = 0; i < n; ++i) slope += g[i] * p[i];
    if (!(slope > 0.0)) {
      reset_h();
      p = g;
      slope = 0.0;
      for (double v : g) slope += v * v;
      if (!(slope > 0.0)) break;
    }

    // Armijo backtracking with halving.
    double alpha = 1.0;
    std::vector<double> xn(n);
    double fn = kNegInf;
    bool accepted = false;
    while (alpha > 1e-20) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = out.x[i] + alpha * p[i];
      fn = guarded(f, xn);
      if (fn >= out.f + c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    auto gn_opt = bfgs_gradient(f, xn);
    if (!gn_opt) {
      out.x = xn;
      out.f = fn;
      ++iter;
      break;
    }
    const std::vector<double>& gn = *gn_opt;

    // BFGS update in minimization variables: grad(-f) = -g, so
    // y_min = -(gn - g) and s stays the step.
    std::vector<double> s(n), y(n);
    double sy = 0.0, snorm = 0.0, ynorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - out.x[i];
      y[i] = -(gn[i] - g[i]);
      sy += s[i] * y[i];
      snorm = std::max(snorm, std::fabs(s[i]));
      ynorm = std::max(ynorm, std::fabs(y[i]));
    }
    if (sy > 1e-12 * snorm * ynorm && sy > 0.0) {
      const double rho = 1.0 / sy;
      // H := (I - rho s y') H (I - rho y s') + rho s s'
      std::vector<double> hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += hinv[i * n + j] * y[j];
        hy[i] = acc;
      }
      double yhy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          hinv[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) +
                             rho * (1.0 + rho * yhy) * s[i] * s[j];
        }
      }
    }

    out.x = xn;
    out.f = fn;
    g = gn;
  }

  out.iterations = iter;
  return out;
}

}  // namespace

OptimResult maximize(const Objective& f, const std::vector<double>& x0,
                     const OptimizerConfig& cfg) {
  for (double v : x0) {
    if (!std::isfinite(v)) {
      throw NonFiniteStart("maximize: starting point has a non-finite coordinate");
    }
  }
  const double f0 = f(x0);
  if (!std::isfinite(f0)) {
    throw NonFiniteStart("maximize: objective is non-finite at the starting point");
  }

  OptimResult result;
  result.x_opt = x0;
  result.f_opt = f0;
  if (x0.empty()) {
    result.converged = true;
    return result;
  }

  const int rounds = (cfg.restarts > 0) ? 3 : 1;
  for (int round = 0; round < rounds; ++round) {
    const double before = result.f_opt;
    RoundResult r = (cfg.method == OptimMethod::NelderMead)
                        ? nelder_mead_round(f, result.x_opt, result.f_opt, cfg)
                        : bfgs_round(f, result.x_opt, result.f_opt, cfg);
    result.iterations += r.iterations;
    result.converged = r.converged;
    if (r.gradient_norm) result.gradient_norm = r.gradient_norm;
    if (r.f >= result.f_opt) {
      result.x_opt = r.x;
      result.f_opt = r.f;
    }
    if (result.f_opt - before < cfg.f_tol) break;
  }
  return result;
}

std::vector<double> finite_diff_gradient(const Objective& f,
                                         const std::vector<double>& x, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("finite_diff_gradient: step must be positive");
  }
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t h = 0; h < x.size(); ++h) {
    double s = step;
    bool done = false;
    for (int attempt = 0; attempt < 2 && !done; ++attempt) {
      xp[h] = x[h] + s;
      const double fp = f(xp);
      xp[h] = x[h] - s;
      const double fm = f(xp);
      xp[h] = x[h];
      if (std::isfinite(fp) && std::isfinite(fm)) {
        g[h] = (fp - fm) / (2.0 * s);
        done = true;
      } else {
        s *= 0.5;
      }
    }
    if (!done) {
      throw NonFiniteObjective(
          "finite_diff_gradient: objective non-finite at stencil points near index " +
          std::to_string(h));
    }
  }
  return g;
}

}  // namespace orthofit
