#pragma once

#include <Eigen/Dense>

namespace ppfa {

/// Centering + whitening fitted on normal training data.
///
/// A raw sample x maps to Λ^{-1/2} Uᵀ (x − mean). The covariance
/// decomposition uses the unbiased 1/(N−1) normalisation.
struct WhiteningTransform
{
  Eigen::VectorXd mean;
  Eigen::MatrixXd eigvecs;  // columns orthonormal
  Eigen::VectorXd singvals; // descending, strictly positive once fitted

  Eigen::Index dim() const { return mean.size(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// Applies the transform to every row of `data`.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& data) const;

  /// U Λ^{1/2} z + mean.
  Eigen::VectorXd invert(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd invert_rows(const Eigen::MatrixXd& data) const;

  static WhiteningTransform identity(Eigen::Index m);
};

/// Relative eigenvalue floor below which the covariance counts as rank deficient.
inline constexpr double kWhiteningRankTol = 1e-10;

/// Fits the transform to rows of `data` (time steps × channels).
/// Throws a numeric Error naming the deficient directions when the sample
/// covariance is singular.
WhiteningTransform fit_whitening(const Eigen::MatrixXd& data);

} // namespace ppfa
