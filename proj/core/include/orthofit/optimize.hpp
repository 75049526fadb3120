#ifndef ORTHOFIT_OPTIMIZE_HPP
#define ORTHOFIT_OPTIMIZE_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace orthofit {

using Objective = std::function<double(const std::vector<double>&)>;

enum class OptimMethod { NelderMead, Bfgs };

struct OptimizerConfig {
  OptimMethod method = OptimMethod::NelderMead;
  std::size_t max_iter = 5000;  // Nelder-Mead budget; BFGS callers usually pass 500
  double f_tol = 1e-10;
  double x_tol = 1e-10;
  // When positive, re-launch from the incumbent after convergence until a
  // round improves by less than f_tol, capped at 3 rounds in total.
  int restarts = 1;
};

struct OptimResult {
  std::vector<double> x_opt;
  double f_opt = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::optional<double> gradient_norm;  // final ||grad||_inf, BFGS only
};

// Maximizes the objective.  Non-finite objective values are treated as
// -inf (the step is rejected) and never propagated into the state.
// Throws NonFiniteStart when x0 has non-finite coordinates or the
// objective is non-finite at x0.
OptimResult maximize(const Objective& f, const std::vector<double>& x0,
                     const OptimizerConfig& cfg);

// Central-difference gradient with a uniform step.  Retries once with a
// halved step when a stencil point evaluates non-finite, then throws
// NonFiniteObjective.
std::vector<double> finite_diff_gradient(const Objective& f,
                                         const std::vector<double>& x, double step);

}  // namespace orthofit

#endif
