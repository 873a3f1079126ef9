#include "ppfa/kalman.hpp"
#include "support/gaussian_oracle.hpp"

#include <doctest.h>

#include <random>

using namespace ppfa;

namespace {

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

ModelParams scalar_model(double beta, double h, double sigma2)
{
  ModelParams p;
  p.beta = Eigen::MatrixXd::Constant(1, 1, beta);
  p.H = Eigen::MatrixXd::Constant(1, 1, h);
  p.sigma2 = Eigen::VectorXd::Constant(1, sigma2);
  set_unit_variance_noise(p);
  return p;
}

} // namespace

TEST_CASE("conjugate single step")
{
  const ModelParams p = scalar_model(0.0, 1.0, 1.0);
  const AugmentedParams a = augment(p);
  const FilterStep step = filter_step(a, p.sigma2, std::nullopt, Eigen::VectorXd::Constant(1, 3.0));
  CHECK(step.belief.mu(0) == doctest::Approx(1.5));
  CHECK(step.belief.V(0, 0) == doctest::Approx(0.5));
  CHECK(step.innovation(0) == 3.0);
  // log N(3; 0, 2)
  CHECK(step.log_density == doctest::Approx(-0.5 * (std::log(2.0 * M_PI * 2.0) + 9.0 / 2.0)));
}

TEST_CASE("uninformative measurements leave the prediction untouched")
{
  const ModelParams p = scalar_model(0.7, 1.0, 1e12);
  const AugmentedParams a = augment(p);
  AugmentedBelief prev{Eigen::VectorXd::Constant(1, 2.0), Eigen::MatrixXd::Constant(1, 1, 0.3),
                       Eigen::MatrixXd::Constant(1, 1, 0.3)};
  const FilterStep step = filter_step(a, p.sigma2, prev, Eigen::VectorXd::Constant(1, 50.0));
  CHECK(std::abs(step.belief.mu(0) - 1.4) < 1e-4);
}

TEST_CASE("filtered and smoothed moments match exact Gaussian conditioning")
{
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CAPTURE(seed);
    const Index r = 1 + static_cast<Index>(seed % 3);
    const Index s = 1 + static_cast<Index>((seed / 3) % 3);
    const ModelParams p = random_stable_model(3, r, s, 0.4, seed);
    const AugmentedParams a = augment(p);
    const Eigen::MatrixXd X = simulate(p, 6, seed + 100).observations;

    const FilterPass pass = forward_filter(a, p.sigma2, X);
    const SmoothedMoments sm = backward_smooth(a, pass.beliefs);
    const testing::OracleResult o = testing::condition_joint(a, p.sigma2, X);

    CHECK(std::abs(pass.log_likelihood - o.log_likelihood) < 1e-8);
    for (Index k = 0; k < 6; ++k) {
      CHECK(max_abs(pass.beliefs[k].mu - o.filtered_mean[k]) < 1e-8);
      CHECK(max_abs(pass.beliefs[k].V - o.filtered_cov[k]) < 1e-8);
      CHECK(max_abs(sm.mean[k] - o.smoothed_mean[k]) < 1e-8);
      CHECK(max_abs(sm.cov[k] - o.smoothed_cov[k]) < 1e-8);
      if (k > 0) {
        CHECK(max_abs(sm.cross[k] - o.smoothed_cross[k]) < 1e-8);
      }
    }
  }
}

TEST_CASE("smoother structure")
{
  const ModelParams p = random_stable_model(4, 2, 2, 0.5, 12);
  const AugmentedParams a = augment(p);
  const Eigen::MatrixXd X = simulate(p, 80, 3).observations;
  const FilterPass pass = forward_filter(a, p.sigma2, X);
  const SmoothedMoments sm = backward_smooth(a, pass.beliefs);

  SUBCASE("last step equals the filter exactly")
  {
    CHECK(sm.mean.back() == pass.beliefs.back().mu);
    CHECK(sm.cov.back() == pass.beliefs.back().V);
  }
  SUBCASE("smoothing never adds uncertainty and stays symmetric")
  {
    for (Index k = 0; k < sm.steps(); ++k) {
      const Eigen::MatrixXd diff = pass.beliefs[k].V - sm.cov[k];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (diff + diff.transpose()));
      CHECK(eig.eigenvalues().minCoeff() > -1e-10);
      CHECK(max_abs(sm.cov[k] - sm.cov[k].transpose()) < 1e-8);
      CHECK(max_abs(pass.beliefs[k].V - pass.beliefs[k].V.transpose()) < 1e-10);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> second(sm.second_moment(k));
      CHECK(second.eigenvalues().minCoeff() > -1e-8);
    }
  }
  SUBCASE("prediction covariance follows the model")
  {
    for (Index k = 1; k < sm.steps(); ++k) {
      const Eigen::MatrixXd P = a.phi * pass.beliefs[k - 1].V * a.phi.transpose() + a.noise;
      CHECK(max_abs(pass.beliefs[k].P - P) < 1e-10);
    }
  }
  SUBCASE("innovations are recorded per step")
  {
    REQUIRE(pass.innovations.size() == pass.beliefs.size());
    const Eigen::VectorXd pred = a.emission * (a.phi * pass.beliefs[9].mu);
    CHECK(max_abs(pass.innovations[10] - (X.row(10).transpose() - pred)) < 1e-12);
  }
}

TEST_CASE("without dynamics the smoother adds nothing")
{
  ModelParams p = random_stable_model(3, 2, 1, 0.5, 2);
  p.beta.setZero();
  set_unit_variance_noise(p);
  const AugmentedParams a = augment(p);
  const Eigen::MatrixXd X = simulate(p, 30, 5).observations;
  const FilterPass pass = forward_filter(a, p.sigma2, X);
  const SmoothedMoments sm = backward_smooth(a, pass.beliefs);
  for (Index k = 0; k < sm.steps(); ++k) {
    CHECK(max_abs(sm.mean[k] - pass.beliefs[k].mu) < 1e-10);
    CHECK(max_abs(sm.cov[k] - pass.beliefs[k].V) < 1e-10);
  }
}
