#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace ppfa {

using Eigen::Index;

/// Parameters of the high-order latent dynamic model
///
///   t_k = Σ_j B_j t_{k−j} + e_k,   e_k ~ N(0, diag(tau2))
///   x_k = H t_k + ε_k,             ε_k ~ N(0, diag(sigma2))
///
/// with each B_j diagonal and every latent coordinate a unit-variance
/// stationary AR(s) process.
struct ModelParams
{
  Eigen::MatrixXd beta;   // s × r, row j−1 holds diag(B_j)
  Eigen::MatrixXd H;      // m × r
  Eigen::VectorXd tau2;   // r, latent innovation variances
  Eigen::VectorXd sigma2; // m, measurement noise variances

  Index m() const { return H.rows(); }
  Index r() const { return H.cols(); }
  Index s() const { return beta.rows(); }
};

/// First-order form of the model on the stacked state
/// t_k^s = (t_k, t_{k−1}, …, t_{k−s+1}).
struct AugmentedParams
{
  Eigen::MatrixXd phi;      // rs × rs block companion
  Eigen::MatrixXd emission; // m × rs, [H 0 … 0]
  Eigen::MatrixXd noise;    // rs × rs, diag(tau2) in the leading block
  Index r = 0;
  Index s = 0;

  Index state_dim() const { return phi.rows(); }
};

/// Largest eigenvalue magnitude of the AR(s) companion matrix for one latent.
double spectral_radius(const Eigen::VectorXd& beta);
bool is_stable(const Eigen::VectorXd& beta);

/// Stationary lag-1..s autocorrelations of one unit-variance AR(s) latent,
/// from the Yule-Walker equations with γ_0 = 1. Throws on unstable input.
Eigen::VectorXd autocovariances(const Eigen::VectorXd& beta);

/// r × s table of autocovariances, row i for latent i.
Eigen::MatrixXd autocovariances(const ModelParams& params);

/// τ² = 1 − Σ_j β_j γ_j. Throws when the result is below −1e-9.
double innovation_variance(const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& gamma);

/// max_i |τ_i² − (1 − Σ_j β_j^i γ_j^i)| with model-implied γ.
double lemma_residual(const ModelParams& params);

/// Replaces tau2 by the unit-variance innovation variances implied by beta.
void set_unit_variance_noise(ModelParams& params);

/// Checks shapes, positivity of the noise terms, stability and the
/// unit-variance residual. Throws config/numeric Errors.
void validate(const ModelParams& params, double lemma_tol = 1e-6);

AugmentedParams augment(const ModelParams& params);

struct Simulation
{
  Eigen::MatrixXd latents;      // n × r
  Eigen::MatrixXd observations; // n × m
};

/// Exact draw from the generative model. t_1..t_s ~ N(0, I_r), the rest
/// follow the recursion. Latent and measurement noise come from two
/// independent substreams of `seed`.
Simulation simulate(const ModelParams& params, Index n_steps, std::uint64_t seed);

/// Random stable model: real AR roots uniform in ±max_root, Gaussian H,
/// isotropic measurement noise `sigma2`.
ModelParams random_stable_model(Index m, Index r, Index s, double sigma2,
                                std::uint64_t seed, double max_root = 0.9);

} // namespace ppfa
