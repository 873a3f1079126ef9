#pragma once

#include "ppfa/ga_optimizer.hpp"
#include "ppfa/kalman.hpp"
#include "ppfa/statespace.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ppfa {

struct EmConfig
{
  int max_iterations = 100;
  double loglik_rel_tol = 1e-6;
  Index r = 1;
  Index s = 1;
  GaConfig ga;
  std::uint64_t seed = 0;
  /// When false, B and Γ stay at their initial values and only the
  /// closed-form H/Σ updates run.
  bool update_beta = true;

  void validate(Index m) const;
};

struct IterationRecord
{
  int iteration = 0;
  double log_likelihood = 0.0; // of the parameters produced by this M-step
  double lemma_residual = 0.0;
  Eigen::MatrixXd beta;
  double seconds = 0.0;
};

struct TrainingTrace
{
  double initial_log_likelihood = 0.0;
  std::vector<IterationRecord> iterations;
  int best_iteration = 0; // 0 means the initialisation
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Starting point for EM on whitened data `X`.
///
/// H spans the r most autocorrelated directions of X (eigenvectors of the
/// symmetrised lag-1 covariance, scaled by the variance along them); Σ is the
/// per-channel variance left unexplained, floored at 1e-4; β is drawn
/// uniformly in (−0.3, 0.3) and redrawn until stable; Γ follows from β.
ModelParams init_params(const Eigen::MatrixXd& X, const EmConfig& cfg);

/// Rows of `X` the filter conditions on: the last N − s + 1.
Eigen::MatrixXd filtered_rows(const Eigen::MatrixXd& X, Index s);

SmoothedMoments e_step(const ModelParams& params, const Eigen::MatrixXd& X);

/// Observed-data log-likelihood via the innovation decomposition.
double log_likelihood(const ModelParams& params, const Eigen::MatrixXd& X);

/// H = (Σ x_k E[t_k]ᵀ)(Σ E[t_k t_kᵀ])⁻¹ over the smoothed steps.
Eigen::MatrixXd update_H(const SmoothedMoments& moments, const Eigen::MatrixXd& X);

/// Diagonal noise update with full second moments, floored at 1e-8.
Eigen::VectorXd update_sigma(const SmoothedMoments& moments,
                             const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& H);

/// Statistics for latent `i` built from smoothed moments (steps 1..T−1).
BetaObjective beta_objective(const SmoothedMoments& moments, Index i);

struct BetaUpdate
{
  Eigen::MatrixXd beta;
  Eigen::VectorXd tau2;
  std::vector<std::string> warnings;
};

/// GA update of every latent's AR coefficients; `iteration` only feeds the
/// seed derivation so that successive M-steps use distinct streams.
BetaUpdate update_beta(const SmoothedMoments& moments, const ModelParams& prev,
                       const EmConfig& cfg, int iteration = 0);

struct FitResult
{
  ModelParams params;
  TrainingTrace trace;
};

/// Runs EM until the relative log-likelihood change drops below the
/// tolerance or the iteration budget is spent; returns the best iterate.
FitResult fit(const Eigen::MatrixXd& X, const EmConfig& cfg);

/// Same, starting from `start` instead of init_params. Its r and s override
/// the config's.
FitResult fit(const Eigen::MatrixXd& X, const EmConfig& cfg, const ModelParams& start);

} // namespace ppfa
