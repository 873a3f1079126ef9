#include "ppfa/kalman.hpp"

#include "ppfa/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ppfa {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a)
{
  return 0.5 * (a + a.transpose());
}

} // namespace

FilterStep filter_step(const AugmentedParams& aug,
                       const Eigen::VectorXd& sigma2,
                       const std::optional<AugmentedBelief>& prev,
                       const Eigen::VectorXd& x)
{
  const Index n = aug.state_dim();
  const Index m = aug.emission.rows();
  if (x.size() != m || sigma2.size() != m) {
    throw config_error("filter: expected " + std::to_string(m) +
                       " measurement channels, got " + std::to_string(x.size()));
  }

  Eigen::VectorXd predicted;
  Eigen::MatrixXd P;
  if (prev) {
    predicted = aug.phi * prev->mu;
    P = symmetrized(aug.phi * prev->V * aug.phi.transpose() + aug.noise);
  } else {
    predicted = Eigen::VectorXd::Zero(n);
    P = Eigen::MatrixXd::Identity(n, n);
  }

  const Eigen::MatrixXd HP = aug.emission * P; // m × n
  Eigen::MatrixXd S = HP * aug.emission.transpose();
  S.diagonal() += sigma2;
  S = symmetrized(S);
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    throw numeric_error("filter: innovation covariance is not positive definite");
  }

  FilterStep out;
  out.innovation = x - aug.emission * predicted;
  // Kᵀ = S⁻¹ H_k P
  const Eigen::MatrixXd gain_t = llt.solve(HP);
  out.belief.mu = predicted + gain_t.transpose() * out.innovation;
  out.belief.V = symmetrized(P - gain_t.transpose() * HP);
  out.belief.P = std::move(P);

  const Eigen::VectorXd whitened = llt.matrixL().solve(out.innovation);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  out.log_density = -0.5 * (static_cast<double>(m) * std::log(2.0 * std::numbers::pi) +
                            log_det + whitened.squaredNorm());
  return out;
}

FilterPass forward_filter(const AugmentedParams& aug,
                          const Eigen::VectorXd& sigma2,
                          const Eigen::MatrixXd& X)
{
  FilterPass pass;
  pass.beliefs.reserve(static_cast<std::size_t>(X.rows()));
  pass.innovations.reserve(static_cast<std::size_t>(X.rows()));
  std::optional<AugmentedBelief> prev;
  for (Index k = 0; k < X.rows(); ++k) {
    FilterStep step = filter_step(aug, sigma2, prev, X.row(k).transpose());
    pass.log_likelihood += step.log_density;
    pass.beliefs.push_back(step.belief);
    pass.innovations.push_back(std::move(step.innovation));
    prev = std::move(step.belief);
  }
  return pass;
}

SmoothedMoments backward_smooth(const AugmentedParams& aug,
                                const std::vector<AugmentedBelief>& filtered)
{
  const Index T = static_cast<Index>(filtered.size());
  SmoothedMoments out;
  out.r = aug.r;
  out.s = aug.s;
  out.mean.resize(filtered.size());
  out.cov.resize(filtered.size());
  out.cross.resize(filtered.size());
  if (T == 0) {
    return out;
  }

  out.mean[T - 1] = filtered[T - 1].mu;
  out.cov[T - 1] = filtered[T - 1].V;
  for (Index k = T - 2; k >= 0; --k) {
    const AugmentedBelief& cur = filtered[k];
    // filtered[k + 1].P = Φ V_k Φᵀ + Γ_k
    const Eigen::MatrixXd& P_next = filtered[k + 1].P;
    Eigen::LLT<Eigen::MatrixXd> llt(P_next);
    if (llt.info() != Eigen::Success) {
      throw numeric_error("smoother: prediction covariance singular at step " +
                          std::to_string(k));
    }
    // J_k = V_k Φᵀ P⁻¹, so J_kᵀ = P⁻¹ Φ V_k.
    const Eigen::MatrixXd gain = llt.solve(aug.phi * cur.V).transpose();
    out.mean[k] = cur.mu + gain * (out.mean[k + 1] - aug.phi * cur.mu);
    out.cov[k] = symmetrized(cur.V + gain * (out.cov[k + 1] - P_next) * gain.transpose());
    out.cross[k + 1] = out.cov[k + 1] * gain.transpose() +
                       out.mean[k + 1] * out.mean[k].transpose();
  }
  return out;
}

} // namespace ppfa
