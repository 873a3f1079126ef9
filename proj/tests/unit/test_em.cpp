#include "ppfa/em_trainer.hpp"
#include "ppfa/error.hpp"
#include "ppfa/preprocess.hpp"
#include "support/gaussian_oracle.hpp"

#include <doctest.h>

#include <random>

using namespace ppfa;

namespace {

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

// Hand-built moments for r = 1, s = 1 with the given per-step means,
// zero covariance and lag-one second moments `cross`.
SmoothedMoments point_moments(const std::vector<double>& means, double cross = 0.0)
{
  SmoothedMoments mo;
  mo.r = 1;
  mo.s = 1;
  for (std::size_t q = 0; q < means.size(); ++q) {
    mo.mean.push_back(Eigen::VectorXd::Constant(1, means[q]));
    mo.cov.push_back(Eigen::MatrixXd::Zero(1, 1));
    mo.cross.push_back(q == 0 ? Eigen::MatrixXd() : Eigen::MatrixXd::Constant(1, 1, cross));
  }
  return mo;
}

// Zero-mean moments with E[t²] = 1 and E[t_k t_{k−1}] = lag1 at every step.
SmoothedMoments stationary_moments(Index steps, double lag1)
{
  SmoothedMoments mo;
  mo.r = 1;
  mo.s = 1;
  for (Index q = 0; q < steps; ++q) {
    mo.mean.push_back(Eigen::VectorXd::Zero(1));
    mo.cov.push_back(Eigen::MatrixXd::Identity(1, 1));
    mo.cross.push_back(q == 0 ? Eigen::MatrixXd() : Eigen::MatrixXd::Constant(1, 1, lag1));
  }
  return mo;
}

} // namespace

TEST_CASE("H update: scalar least squares")
{
  const SmoothedMoments mo = point_moments({1.0, 2.0});
  Eigen::MatrixXd X(2, 1);
  X << 2.0, 4.0;
  CHECK(update_H(mo, X)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("H update with identity second moments is the cross moment")
{
  SmoothedMoments mo;
  mo.r = 2;
  mo.s = 1;
  Eigen::MatrixXd X(3, 3);
  X << 1, 2, 3, 4, 5, 6, 7, 8, 10;
  Eigen::MatrixXd t(3, 2);
  t << 0.1, 0.2, -0.3, 0.4, 0.5, -0.6;
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(2, 2);
  for (Index q = 0; q < 3; ++q) {
    second += t.row(q).transpose() * t.row(q);
  }
  // Pick covariances so that Σ_k E[t tᵀ] = 3 I.
  for (Index q = 0; q < 3; ++q) {
    mo.mean.push_back(t.row(q).transpose());
    mo.cov.push_back((3.0 * Eigen::MatrixXd::Identity(2, 2) - second) / 3.0);
    mo.cross.emplace_back();
  }
  const Eigen::MatrixXd expected = X.transpose() * t / 3.0;
  CHECK(max_abs(update_H(mo, X) - expected) < 1e-12);
}

TEST_CASE("H update reports collapsed latents")
{
  SmoothedMoments mo;
  mo.r = 2;
  mo.s = 1;
  for (int q = 0; q < 3; ++q) {
    mo.mean.push_back(Eigen::Vector2d(1.0 + q, 0.0));
    mo.cov.push_back(Eigen::MatrixXd::Zero(2, 2));
    mo.cross.emplace_back();
  }
  try {
    update_H(mo, Eigen::MatrixXd::Ones(3, 2));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::numeric);
    CHECK(std::string(e.what()).find("collapsed latent dimensions: 1") != std::string::npos);
  }
}

TEST_CASE("sigma update")
{
  SUBCASE("exact fit hits the floor")
  {
    const SmoothedMoments mo = point_moments({1.0, -2.0, 0.5});
    Eigen::MatrixXd X(3, 1);
    X << 3.0, -6.0, 1.5;
    const Eigen::MatrixXd H = Eigen::MatrixXd::Constant(1, 1, 3.0);
    CHECK(update_sigma(mo, X, H)(0) == 1e-8);
  }
  SUBCASE("H = 0 gives the mean square")
  {
    const SmoothedMoments mo = point_moments({1.0, 2.0, 3.0});
    Eigen::MatrixXd X(3, 2);
    X << 1, 2, 3, 4, 5, 6;
    const Eigen::VectorXd s2 = update_sigma(mo, X, Eigen::MatrixXd::Zero(2, 1));
    CHECK(s2(0) == doctest::Approx((1.0 + 9.0 + 25.0) / 3.0));
    CHECK(s2(1) == doctest::Approx((4.0 + 16.0 + 36.0) / 3.0));
  }
}

TEST_CASE("exact M-step on true moments recovers H and sigma")
{
  ModelParams truth = random_stable_model(5, 2, 2, 0.25, 17);
  const Eigen::MatrixXd X = simulate(truth, 10000, 3).observations;
  const SmoothedMoments mo = e_step(truth, X);
  const Eigen::MatrixXd H = update_H(mo, X);
  for (Index i = 0; i < 2; ++i) {
    const double plus = (H.col(i) - truth.H.col(i)).cwiseAbs().maxCoeff();
    const double minus = (H.col(i) + truth.H.col(i)).cwiseAbs().maxCoeff();
    CHECK(std::min(plus, minus) < 0.05);
  }
  const Eigen::VectorXd s2 = update_sigma(mo, X, H);
  for (Index c = 0; c < 5; ++c) {
    CHECK(s2(c) > 0.2);
    CHECK(s2(c) < 0.3);
  }
}

TEST_CASE("beta update from exact AR(1) moments")
{
  EmConfig cfg;
  ModelParams prev;
  prev.beta = Eigen::MatrixXd::Constant(1, 1, 0.1);
  prev.H = Eigen::MatrixXd::Ones(1, 1);
  prev.sigma2 = Eigen::VectorXd::Ones(1);
  set_unit_variance_noise(prev);

  SUBCASE("beta* = 0.6")
  {
    const BetaUpdate up = update_beta(stationary_moments(500, 0.6), prev, cfg);
    CHECK(std::abs(up.beta(0, 0) - 0.6) < 0.02);
    CHECK(std::abs(up.tau2(0) - 0.64) < 0.03);
    CHECK(up.warnings.empty());

    const BetaUpdate again = update_beta(stationary_moments(500, 0.6), prev, cfg);
    CHECK(again.beta == up.beta);
    CHECK(again.tau2 == up.tau2);
  }
  SUBCASE("white latent")
  {
    const BetaUpdate up = update_beta(stationary_moments(500, 0.0), prev, cfg);
    CHECK(std::abs(up.beta(0, 0)) < 0.02);
    CHECK(std::abs(up.tau2(0) - 1.0) < 0.01);
  }
}

TEST_CASE("beta objective statistics from smoothed moments")
{
  const BetaObjective obj = beta_objective(stationary_moments(50, 0.6), 0);
  CHECK(obj.moments(0, 0) == doctest::Approx(1.0));
  CHECK(obj.moments(0, 1) == doctest::Approx(0.6));
  CHECK(obj.moments(1, 1) == doctest::Approx(1.0));
  CHECK(obj.gamma(0) == doctest::Approx(0.6));
  CHECK(obj.n == 49.0);
}

TEST_CASE("E-step")
{
  SUBCASE("no dynamics, H = I, unit noise: posterior mean is half the data")
  {
    ModelParams p;
    p.beta = Eigen::MatrixXd::Zero(1, 2);
    p.H = Eigen::MatrixXd::Identity(2, 2);
    p.sigma2 = Eigen::VectorXd::Ones(2);
    set_unit_variance_noise(p);
    Eigen::MatrixXd X(3, 2);
    X << 1, 2, -3, 4, 0.5, 0;
    const SmoothedMoments mo = e_step(p, X);
    for (Index k = 0; k < 3; ++k) {
      CHECK(max_abs(mo.mean[k] - X.row(k).transpose() / 2.0) < 1e-12);
    }
  }
  SUBCASE("noiseless emission: posterior mean is the least-squares reconstruction")
  {
    ModelParams p = random_stable_model(4, 2, 1, 1.0, 5);
    p.sigma2.setConstant(1e-12);
    const Eigen::MatrixXd X = simulate(p, 20, 1).observations;
    const SmoothedMoments mo = e_step(p, X);
    const Eigen::MatrixXd pinv = p.H.completeOrthogonalDecomposition().pseudoInverse();
    for (Index k = 0; k < 20; ++k) {
      CHECK(max_abs(mo.mean[k] - pinv * X.row(k).transpose()) < 1e-4);
    }
  }
  SUBCASE("matches exact conditioning on the filtered rows")
  {
    const ModelParams p = random_stable_model(3, 2, 2, 0.3, 8);
    const Eigen::MatrixXd X = simulate(p, 7, 2).observations;
    const SmoothedMoments mo = e_step(p, X);
    CHECK(mo.offset == 1);
    const testing::OracleResult o =
      testing::condition_joint(augment(p), p.sigma2, filtered_rows(X, 2));
    REQUIRE(mo.steps() == 6);
    for (Index k = 0; k < 6; ++k) {
      CHECK(max_abs(mo.mean[k] - o.smoothed_mean[k]) < 1e-8);
      CHECK(max_abs(mo.cov[k] - o.smoothed_cov[k]) < 1e-8);
    }
    CHECK(std::abs(log_likelihood(p, X) - o.log_likelihood) < 1e-8);
  }
}

TEST_CASE("log-likelihood")
{
  SUBCASE("single sample with H = 0")
  {
    ModelParams p;
    p.beta = Eigen::MatrixXd::Zero(1, 1);
    p.H = Eigen::MatrixXd::Zero(1, 1);
    p.sigma2 = Eigen::VectorXd::Constant(1, 2.0);
    set_unit_variance_noise(p);
    const double x = 1.3;
    CHECK(log_likelihood(p, Eigen::MatrixXd::Constant(1, 1, x)) ==
          doctest::Approx(-0.5 * (std::log(2.0 * M_PI * 2.0) + x * x / 2.0)).epsilon(1e-12));
  }
  SUBCASE("rescaling shifts only by the Jacobian")
  {
    const ModelParams p = random_stable_model(3, 2, 2, 0.3, 14);
    const Eigen::MatrixXd X = simulate(p, 40, 6).observations;
    const double c = 3.0;
    ModelParams q = p;
    q.H *= c;
    q.sigma2 *= c * c;
    const double shift = -static_cast<double>(filtered_rows(X, 2).size()) * std::log(c);
    CHECK(log_likelihood(q, c * X) == doctest::Approx(log_likelihood(p, X) + shift).epsilon(1e-10));
  }
}

TEST_CASE("initialisation")
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(20000, 5);
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      X(i, j) = nd(rng);
    }
  }
  EmConfig cfg;
  cfg.r = 2;
  cfg.s = 3;
  const ModelParams p = init_params(X, cfg);
  CHECK_NOTHROW(validate(p));
  CHECK(p.s() == 3);
  CHECK(p.r() == 2);
  // Orthonormal directions with unit variance along them explain r of m units.
  CHECK(p.sigma2.sum() == doctest::Approx(3.0).epsilon(0.03));
  const ModelParams again = init_params(X, cfg);
  CHECK(again.beta == p.beta);
  CHECK(again.H == p.H);
}

TEST_CASE("fit")
{
  const ModelParams truth = random_stable_model(4, 2, 2, 0.25, 9);
  const WhiteningTransform w = fit_whitening(simulate(truth, 1500, 4).observations);
  const Eigen::MatrixXd X = w.apply_rows(simulate(truth, 1500, 4).observations);
  EmConfig cfg;
  cfg.r = 2;
  cfg.s = 2;
  cfg.max_iterations = 8;
  cfg.seed = 5;

  SUBCASE("deterministic, valid and no worse than its start")
  {
    const FitResult a = fit(X, cfg);
    const FitResult b = fit(X, cfg);
    REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
    for (std::size_t i = 0; i < a.trace.iterations.size(); ++i) {
      CHECK(a.trace.iterations[i].log_likelihood == b.trace.iterations[i].log_likelihood);
      CHECK(a.trace.iterations[i].beta == b.trace.iterations[i].beta);
    }
    CHECK(a.params.H == b.params.H);
    CHECK_NOTHROW(validate(a.params));
    CHECK(lemma_residual(a.params) <= 1e-6);
    CHECK(log_likelihood(a.params, X) >= a.trace.initial_log_likelihood);
  }
  SUBCASE("one iteration records one E and one M step")
  {
    cfg.max_iterations = 1;
    const FitResult r = fit(X, cfg);
    CHECK(r.trace.iterations.size() == 1);
  }
  SUBCASE("with B frozen the likelihood never decreases")
  {
    cfg.update_beta = false;
    cfg.max_iterations = 15;
    cfg.loglik_rel_tol = 1e-14;
    ModelParams start = init_params(X, cfg);
    start.beta = truth.beta;
    set_unit_variance_noise(start);
    const FitResult r = fit(X, cfg, start);
    double prev = r.trace.initial_log_likelihood;
    for (const IterationRecord& rec : r.trace.iterations) {
      CHECK(rec.log_likelihood >= prev - 1e-8);
      CHECK(rec.beta == truth.beta);
      prev = rec.log_likelihood;
    }
  }
  SUBCASE("too little data")
  {
    CHECK_THROWS_AS(fit(X.topRows(20), cfg), Error);
  }
}
