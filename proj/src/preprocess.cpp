#include "ppfa/preprocess.hpp"

#include "ppfa/error.hpp"

#include <sstream>
#include <string>

namespace ppfa {

Eigen::VectorXd WhiteningTransform::apply(const Eigen::VectorXd& x) const
{
  if (x.size() != dim()) {
    throw config_error("whitening: expected " + std::to_string(dim()) +
                       " channels, got " + std::to_string(x.size()));
  }
  return singvals.cwiseSqrt().cwiseInverse().asDiagonal() *
         (eigvecs.transpose() * (x - mean));
}

Eigen::MatrixXd WhiteningTransform::apply_rows(const Eigen::MatrixXd& data) const
{
  if (data.cols() != dim()) {
    throw config_error("whitening: expected " + std::to_string(dim()) +
                       " channels, got " + std::to_string(data.cols()));
  }
  Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
  return (centered * eigvecs) *
         singvals.cwiseSqrt().cwiseInverse().asDiagonal();
}

Eigen::VectorXd WhiteningTransform::invert(const Eigen::VectorXd& z) const
{
  if (z.size() != dim()) {
    throw config_error("whitening: dimension mismatch in invert");
  }
  return eigvecs * (singvals.cwiseSqrt().asDiagonal() * z) + mean;
}

Eigen::MatrixXd WhiteningTransform::invert_rows(const Eigen::MatrixXd& data) const
{
  if (data.cols() != dim()) {
    throw config_error("whitening: dimension mismatch in invert");
  }
  Eigen::MatrixXd out =
    (data * singvals.cwiseSqrt().asDiagonal()) * eigvecs.transpose();
  return out.rowwise() + mean.transpose();
}

WhiteningTransform WhiteningTransform::identity(Eigen::Index m)
{
  return {Eigen::VectorXd::Zero(m),
          Eigen::MatrixXd::Identity(m, m),
          Eigen::VectorXd::Ones(m)};
}

WhiteningTransform fit_whitening(const Eigen::MatrixXd& data)
{
  const Eigen::Index n = data.rows();
  const Eigen::Index m = data.cols();
  if (n < 2 || m < 1) {
    throw config_error("whitening: need at least 2 rows and 1 column");
  }
  if (!data.allFinite()) {
    throw numeric_error("whitening: data contains non-finite values");
  }

  WhiteningTransform t;
  t.mean = data.colwise().mean().transpose();
  Eigen::MatrixXd centered = data.rowwise() - t.mean.transpose();
  Eigen::MatrixXd cov =
    (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw numeric_error("whitening: eigendecomposition failed");
  }
  // Eigen sorts ascending; store descending.
  t.singvals = eig.eigenvalues().reverse();
  t.eigvecs = eig.eigenvectors().rowwise().reverse();

  // Fix each eigenvector's sign so the largest-magnitude entry is positive.
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::Index arg = 0;
    t.eigvecs.col(j).cwiseAbs().maxCoeff(&arg);
    if (t.eigvecs(arg, j) < 0.0) {
      t.eigvecs.col(j) = -t.eigvecs.col(j);
    }
  }

  const double largest = t.singvals(0);
  std::ostringstream deficient;
  int count = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!(t.singvals(j) > kWhiteningRankTol * largest) || largest <= 0.0) {
      deficient << (count++ ? ", " : "") << j;
    }
  }
  if (count > 0) {
    throw numeric_error(
      "whitening: sample covariance is rank deficient; zero-variance "
      "directions (descending eigen order): " + deficient.str());
  }
  return t;
}

} // namespace ppfa
