#pragma once

// Brute-force reference for the filter/smoother: builds the full joint
// Gaussian of the stacked states and observations and conditions it
// directly. Independent of the recursive implementation.

#include "ppfa/statespace.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

namespace ppfa::testing {

struct OracleResult
{
  std::vector<Eigen::VectorXd> filtered_mean;
  std::vector<Eigen::MatrixXd> filtered_cov;
  std::vector<Eigen::VectorXd> smoothed_mean;
  std::vector<Eigen::MatrixXd> smoothed_cov;
  std::vector<Eigen::MatrixXd> smoothed_cross; // E[z_k z_{k−1}ᵀ], [0] empty
  double log_likelihood = 0.0;
};

inline OracleResult condition_joint(const AugmentedParams& aug, const Eigen::VectorXd& sigma2,
                                    const Eigen::MatrixXd& Y)
{
  const Eigen::Index T = Y.rows();
  const Eigen::Index n = aug.state_dim();
  const Eigen::Index m = Y.cols();
  const Eigen::MatrixXd& F = aug.phi;
  const Eigen::MatrixXd& H = aug.emission;

  // Marginal covariances C_k = Cov(z_k).
  std::vector<Eigen::MatrixXd> C(static_cast<std::size_t>(T));
  C[0] = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k < T; ++k) {
    C[k] = F * C[k - 1] * F.transpose() + aug.noise;
  }
  Eigen::MatrixXd Szz(n * T, n * T);
  for (Eigen::Index i = 0; i < T; ++i) {
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index j = i; j >= 0; --j) {
      // Cov(z_i, z_j) = F^{i−j} C_j
      const Eigen::MatrixXd block = power * C[j];
      Szz.block(i * n, j * n, n, n) = block;
      Szz.block(j * n, i * n, n, n) = block.transpose();
      power = power * F;
    }
  }
  Eigen::MatrixXd Hbig = Eigen::MatrixXd::Zero(m * T, n * T);
  for (Eigen::Index k = 0; k < T; ++k) {
    Hbig.block(k * m, k * n, m, n) = H;
  }
  const Eigen::MatrixXd Syz = Hbig * Szz;
  Eigen::MatrixXd Syy = Syz * Hbig.transpose();
  for (Eigen::Index k = 0; k < T; ++k) {
    Syy.block(k * m, k * m, m, m).diagonal() += sigma2;
  }
  Eigen::VectorXd y(m * T);
  for (Eigen::Index k = 0; k < T; ++k) {
    y.segment(k * m, m) = Y.row(k).transpose();
  }

  OracleResult out;
  for (Eigen::Index k = 0; k < T; ++k) {
    const Eigen::Index ny = (k + 1) * m;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Syy.topLeftCorner(ny, ny));
    const Eigen::MatrixXd Szy = Syz.block(0, k * n, ny, n).transpose();
    out.filtered_mean.push_back(Szy * ldlt.solve(y.head(ny)));
    out.filtered_cov.push_back(Szz.block(k * n, k * n, n, n) -
                               Szy * ldlt.solve(Szy.transpose()));
  }

  Eigen::LDLT<Eigen::MatrixXd> full(Syy);
  const Eigen::VectorXd mean = Syz.transpose() * full.solve(y);
  const Eigen::MatrixXd cov = Szz - Syz.transpose() * full.solve(Syz);
  for (Eigen::Index k = 0; k < T; ++k) {
    out.smoothed_mean.push_back(mean.segment(k * n, n));
    out.smoothed_cov.push_back(cov.block(k * n, k * n, n, n));
    if (k == 0) {
      out.smoothed_cross.emplace_back();
    } else {
      out.smoothed_cross.push_back(cov.block(k * n, (k - 1) * n, n, n) +
                                   mean.segment(k * n, n) * mean.segment((k - 1) * n, n).transpose());
    }
  }

  const double log_det = full.vectorD().array().log().sum();
  out.log_likelihood = -0.5 * (static_cast<double>(m * T) * std::log(2.0 * std::numbers::pi) +
                               log_det + y.dot(full.solve(y)));
  return out;
}

} // namespace ppfa::testing
