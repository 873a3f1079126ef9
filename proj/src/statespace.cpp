#include "ppfa/statespace.hpp"

#include "ppfa/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace ppfa {

namespace {

Eigen::MatrixXd companion(const Eigen::VectorXd& beta)
{
  const Index s = beta.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(s, s);
  c.row(0) = beta.transpose();
  if (s > 1) {
    c.bottomLeftCorner(s - 1, s - 1).setIdentity();
  }
  return c;
}

} // namespace

double spectral_radius(const Eigen::VectorXd& beta)
{
  if (beta.size() == 1) {
    return std::abs(beta(0));
  }
  Eigen::EigenSolver<Eigen::MatrixXd> eig(companion(beta), false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stable(const Eigen::VectorXd& beta)
{
  return beta.allFinite() && spectral_radius(beta) < 1.0;
}

Eigen::VectorXd autocovariances(const Eigen::VectorXd& beta)
{
  const Index s = beta.size();
  if (!is_stable(beta)) {
    throw numeric_error("autocovariances: AR coefficients are not stable "
                        "(no stationary distribution)");
  }
  // γ_j − Σ_l β_l γ_{|j−l|} = 0 for j = 1..s, γ_0 = 1 moved to the rhs.
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(s, s);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s);
  for (Index j = 1; j <= s; ++j) {
    for (Index l = 1; l <= s; ++l) {
      const Index lag = std::abs(j - l);
      if (lag == 0) {
        b(j - 1) += beta(l - 1);
      } else {
        a(j - 1, lag - 1) -= beta(l - 1);
      }
    }
  }
  return a.partialPivLu().solve(b);
}

Eigen::MatrixXd autocovariances(const ModelParams& params)
{
  Eigen::MatrixXd out(params.r(), params.s());
  for (Index i = 0; i < params.r(); ++i) {
    out.row(i) = autocovariances(Eigen::VectorXd(params.beta.col(i))).transpose();
  }
  return out;
}

double innovation_variance(const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& gamma)
{
  const double tau2 = 1.0 - beta.dot(gamma);
  if (tau2 < -1e-9) {
    throw numeric_error("unit-variance constraint violated: 1 - sum(beta*gamma) = " +
                        std::to_string(tau2));
  }
  return tau2;
}

double lemma_residual(const ModelParams& params)
{
  double worst = 0.0;
  const Eigen::MatrixXd gamma = autocovariances(params);
  for (Index i = 0; i < params.r(); ++i) {
    const double implied = 1.0 - params.beta.col(i).dot(gamma.row(i).transpose());
    worst = std::max(worst, std::abs(params.tau2(i) - implied));
  }
  return worst;
}

void set_unit_variance_noise(ModelParams& params)
{
  params.tau2.resize(params.r());
  for (Index i = 0; i < params.r(); ++i) {
    const Eigen::VectorXd b = params.beta.col(i);
    params.tau2(i) = std::max(innovation_variance(b, autocovariances(b)), 0.0);
  }
}

void validate(const ModelParams& p, double lemma_tol)
{
  if (p.r() < 1 || p.s() < 1 || p.m() < 1) {
    throw config_error("model: m, r and s must all be at least 1");
  }
  if (p.beta.cols() != p.r() || p.tau2.size() != p.r() || p.sigma2.size() != p.m()) {
    throw config_error("model: inconsistent parameter shapes");
  }
  if (!p.beta.allFinite() || !p.H.allFinite() || !p.tau2.allFinite() ||
      !p.sigma2.allFinite()) {
    throw numeric_error("model: non-finite parameter");
  }
  if ((p.tau2.array() < 0.0).any()) {
    throw numeric_error("model: negative latent noise variance");
  }
  if ((p.sigma2.array() <= 0.0).any()) {
    throw numeric_error("model: measurement noise variances must be positive");
  }
  for (Index i = 0; i < p.r(); ++i) {
    if (!is_stable(p.beta.col(i))) {
      throw numeric_error("model: latent " + std::to_string(i) +
                          " has unstable AR coefficients");
    }
  }
  const double residual = lemma_residual(p);
  if (residual > lemma_tol) {
    throw numeric_error("model: unit-variance residual " + std::to_string(residual) +
                        " exceeds tolerance");
  }
}

AugmentedParams augment(const ModelParams& p)
{
  const Index r = p.r();
  const Index s = p.s();
  const Index n = r * s;
  AugmentedParams a;
  a.r = r;
  a.s = s;
  a.phi = Eigen::MatrixXd::Zero(n, n);
  for (Index j = 0; j < s; ++j) {
    a.phi.block(0, j * r, r, r).diagonal() = p.beta.row(j).transpose();
  }
  if (s > 1) {
    a.phi.bottomLeftCorner(n - r, n - r).setIdentity();
  }
  a.emission = Eigen::MatrixXd::Zero(p.m(), n);
  a.emission.leftCols(r) = p.H;
  a.noise = Eigen::MatrixXd::Zero(n, n);
  a.noise.topLeftCorner(r, r).diagonal() = p.tau2;
  return a;
}

Simulation simulate(const ModelParams& p, Index n_steps, std::uint64_t seed)
{
  const Index r = p.r();
  const Index s = p.s();
  const Index m = p.m();

  std::seed_seq latent_seq{static_cast<std::uint32_t>(seed),
                           static_cast<std::uint32_t>(seed >> 32), 0u};
  std::seed_seq noise_seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32), 1u};
  std::mt19937_64 latent_rng(latent_seq);
  std::mt19937_64 noise_rng(noise_seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const Eigen::ArrayXd tau = p.tau2.cwiseSqrt();
  const Eigen::ArrayXd sigma = p.sigma2.cwiseSqrt();

  Simulation sim;
  sim.latents.resize(n_steps, r);
  sim.observations.resize(n_steps, m);
  for (Index k = 0; k < n_steps; ++k) {
    for (Index i = 0; i < r; ++i) {
      if (k < s) {
        sim.latents(k, i) = normal(latent_rng);
        continue;
      }
      double acc = 0.0;
      for (Index j = 1; j <= s; ++j) {
        acc += p.beta(j - 1, i) * sim.latents(k - j, i);
      }
      sim.latents(k, i) = acc + tau(i) * normal(latent_rng);
    }
    for (Index c = 0; c < m; ++c) {
      double acc = 0.0;
      for (Index i = 0; i < r; ++i) {
        acc += p.H(c, i) * sim.latents(k, i);
      }
      sim.observations(k, c) = acc + sigma(c) * normal(noise_rng);
    }
  }
  return sim;
}

ModelParams random_stable_model(Index m, Index r, Index s, double sigma2,
                                std::uint64_t seed, double max_root)
{
  if (m < 1 || r < 1 || s < 1 || r > m) {
    throw config_error("random model: require 1 <= r <= m and s >= 1");
  }
  if (!(sigma2 > 0.0)) {
    throw config_error("random model: sigma2 must be positive");
  }
  if (!(max_root > 0.0 && max_root < 1.0)) {
    throw config_error("random model: max_root must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> root(-max_root, max_root);
  std::normal_distribution<double> normal(0.0, 1.0);

  ModelParams p;
  p.beta.resize(s, r);
  for (Index i = 0; i < r; ++i) {
    // Expand Π_q (1 − ρ_q z) to get AR coefficients with roots ρ_q.
    Eigen::VectorXd poly = Eigen::VectorXd::Zero(s + 1);
    poly(0) = 1.0;
    for (Index q = 0; q < s; ++q) {
      const double rho = root(rng);
      for (Index d = q + 1; d >= 1; --d) {
        poly(d) -= rho * poly(d - 1);
      }
    }
    p.beta.col(i) = -poly.tail(s);
  }
  p.H.resize(m, r);
  for (Index c = 0; c < m; ++c) {
    for (Index i = 0; i < r; ++i) {
      p.H(c, i) = normal(rng);
    }
  }
  p.sigma2 = Eigen::VectorXd::Constant(m, sigma2);
  set_unit_variance_noise(p);
  return p;
}

} // namespace ppfa
