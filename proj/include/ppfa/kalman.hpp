#pragma once

#include "ppfa/statespace.hpp"

#include <optional>
#include <vector>

namespace ppfa {

/// Filtered posterior N(mu, V) of the stacked state, plus the one-step
/// prediction covariance P it was updated from.
struct AugmentedBelief
{
  Eigen::VectorXd mu;
  Eigen::MatrixXd V;
  Eigen::MatrixXd P;
};

struct FilterStep
{
  AugmentedBelief belief;
  Eigen::VectorXd innovation; // x − H_k Φ μ_{k−1}
  double log_density = 0.0;   // log N(innovation; 0, H_k P H_kᵀ + Σ)
};

/// One measurement update. Without a previous belief the prediction is the
/// prior N(0, I_rs) on the first stacked state.
FilterStep filter_step(const AugmentedParams& aug,
                       const Eigen::VectorXd& sigma2,
                       const std::optional<AugmentedBelief>& prev,
                       const Eigen::VectorXd& x);

struct FilterPass
{
  std::vector<AugmentedBelief> beliefs;
  std::vector<Eigen::VectorXd> innovations;
  double log_likelihood = 0.0;
};

/// Filters every row of `X` in order, starting from the N(0, I_rs) prior at
/// row 0.
FilterPass forward_filter(const AugmentedParams& aug,
                          const Eigen::VectorXd& sigma2,
                          const Eigen::MatrixXd& X);

/// Smoothed posterior moments of the stacked state at every filtered step.
///
/// `cross[q]` is E[z_q z_{q−1}ᵀ] (full second moment); `cross[0]` is unused
/// and left empty. `offset` is the data row of step 0.
struct SmoothedMoments
{
  std::vector<Eigen::VectorXd> mean;
  std::vector<Eigen::MatrixXd> cov;
  std::vector<Eigen::MatrixXd> cross;
  Index r = 0;
  Index s = 0;
  Index offset = 0;

  Index steps() const { return static_cast<Index>(mean.size()); }
  Eigen::MatrixXd second_moment(Index q) const
  {
    return cov[q] + mean[q] * mean[q].transpose();
  }
};

/// Rauch-Tung-Striebel backward pass over the output of forward_filter.
SmoothedMoments backward_smooth(const AugmentedParams& aug,
                                const std::vector<AugmentedBelief>& filtered);

} // namespace ppfa
