#ifndef ORTHOFIT_CPC_HPP
#define ORTHOFIT_CPC_HPP

#include <optional>
#include <string>
#include <vector>

#include "orthofit/matrix.hpp"
#include "orthofit/mvdist.hpp"
#include "orthofit/optimize.hpp"
#include "orthofit/plr.hpp"

namespace orthofit {

// Labeled groups of observations sharing one dimension.  Each group must
// have at least d + 1 rows (DegenerateGroup otherwise).
class GroupedDataset {
public:
  GroupedDataset(std::vector<std::string> names, std::vector<DenseMatrix> groups);

  std::size_t k() const { return groups_.size(); }
  std::size_t d() const { return groups_.front().cols(); }
  std::size_t n_total() const;
  std::size_t n(std::size_t j) const { return groups_[j].rows(); }
  const std::string& name(std::size_t j) const { return names_[j]; }
  const DenseMatrix& group(std::size_t j) const { return groups_[j]; }

private:
  std::vector<std::string> names_;
  std::vector<DenseMatrix> groups_;
};

struct GroupStats {
  std::size_t n = 0;
  std::vector<double> mean;
  DenseMatrix scatter;  // divisor n, centered at the sample mean
};

// Per-group sample means and scatter matrices.  Throws DegenerateGroup
// when a scatter matrix is not positive definite.
std::vector<GroupStats> group_stats(const GroupedDataset& data);

enum class ModelFamily { Normal, LeptokurticNormal };
enum class ModelStructure { Cpc, Unconstrained };

struct ModelSpec {
  ModelFamily family = ModelFamily::Normal;
  ModelStructure structure = ModelStructure::Cpc;

  bool operator==(const ModelSpec&) const = default;
};

// Canonical model names: "n-cpc", "ln-cpc", "n-pc", "ln-pc".
std::string model_name(const ModelSpec& spec);
std::optional<ModelSpec> parse_model_name(const std::string& name);

// Number of free parameters:
//   CPC:           k d  +  d(d-1)/2  +  k d   (+ k for the kurtosis shapes)
//   unconstrained: k d  +  k d(d+1)/2         (+ k)
std::size_t param_count(const ModelSpec& spec, std::size_t d, std::size_t k);

// Full parameter point of one model.  CPC keeps a single rotation (and
// its frozen permutation); the unconstrained structure keeps one per
// group.  beta is empty for the normal family.
struct ParamSet {
  ModelSpec spec;
  std::size_t d = 0;
  std::size_t k = 0;
  std::vector<std::vector<double>> mu;      // k vectors of length d
  std::vector<OrthogonalMatrix> q;          // 1 (CPC) or k (unconstrained)
  std::vector<Permutation> p_frozen;        // parallel to q
  std::vector<std::vector<double>> lambda;  // k vectors of length d
  std::vector<double> beta;                 // k entries, or empty
};

// Group covariance implied by the parameters: Q Lambda_j Q'.
DenseMatrix fitted_sigma(const ParamSet& params, std::size_t j);

// Log-likelihoods.  Non-positive or non-finite eigenvalue parameters
// yield -inf (a rejected optimizer step) rather than an exception.
double loglik_ncpc(const ParamSet& params, const std::vector<GroupStats>& stats);
double loglik_lncpc(const ParamSet& params, const GroupedDataset& data);
double loglik_unconstrained(const ParamSet& params, const GroupedDataset& data);

// Unconstrained coordinate vector:
//   [all means] ++ [packed sub-diagonals of L] ++ [log eigenvalues]
//   ++ [logit-scaled kurtosis shapes]           (leptokurtic family only)
// to_unconstrained throws BetaOnBoundary when a kurtosis shape sits on 0
// or beta_max; from_unconstrained throws LengthMismatch on a wrong
// length.  The template parameter set supplies the frozen permutations.
std::vector<double> to_unconstrained(const ParamSet& params);
ParamSet from_unconstrained(const std::vector<double>& v, const ParamSet& tmpl);

struct InitResult {
  ParamSet params;
  // Per group: whether the kurtosis moment estimate had to be pulled
  // into [0.01, beta_max - 0.01].  Empty for the normal family.
  std::vector<bool> beta_clamped;
};

// Starting point: sample means; rotation from the eigenvectors of the
// pooled scatter (per-group scatter for the unconstrained structure);
// eigenvalue starts q_h' S_j q_h; kurtosis shapes from the empirical
// excess kurtosis.  The rotation is canonicalized through its own
// parameterization so the packed coordinates reproduce it exactly.
InitResult initialize(const GroupedDataset& data, const ModelSpec& spec);

struct FitOptions {
  enum class Driver { Auto, NelderMeadOnly, BfgsOnly };
  Driver driver = Driver::Auto;  // Auto: Nelder-Mead, then BFGS polish
  std::size_t nm_max_iter = 5000;
  std::size_t bfgs_max_iter = 500;
  double f_tol = 1e-10;
  double x_tol = 1e-10;
  int restarts = 1;
};

struct FitResult {
  ParamSet params;
  double loglik = 0.0;
  std::size_t m = 0;  // free parameter count
  std::size_t n = 0;
  OptimResult optim;
  std::optional<double> stationarity_residual;  // CPC structures only
  std::vector<bool> beta_clamped;
};

// Maximum likelihood fit.  The normal unconstrained model is solved in
// closed form; the leptokurtic unconstrained model separates into
// independent single-group problems; the CPC structures run the
// optimizer on the unconstrained coordinates.
FitResult fit(const GroupedDataset& data, const ModelSpec& spec,
              const FitOptions& opts = {});

// First-order stationarity defect of a rotation for the normal CPC
// problem: with lambda_jh = q_h' S_j q_h, the score along the (h,l)
// plane rotation is sum_j n_j (lambda_jh - lambda_jl) /
// (lambda_jh lambda_jl) * q_h' S_j q_l; returns the largest absolute
// value over pairs h < l.
double fg_stationarity_residual(const OrthogonalMatrix& q,
                                const std::vector<GroupStats>& stats);

struct FgResult {
  OrthogonalMatrix q;
  std::vector<std::vector<double>> lambda;  // diag(Q' S_j Q) per group
  std::size_t sweeps = 0;
};

// Classical pairwise-rotation solver for the normal CPC rotation, used
// as an independent cross-check of the optimizer path.  Sweeps cyclic
// column pairs, solving each 2x2 subproblem by a fixed-point iteration
// on the rotation angle.  Throws NoConvergence after max_sweeps.
FgResult fg_algorithm(const std::vector<GroupStats>& stats,
                      std::size_t max_sweeps = 500);

}  // namespace orthofit

#endif
