#include "ppfa/em_trainer.hpp"

#include "ppfa/error.hpp"
#include "ppfa/seeding.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace ppfa {

void EmConfig::validate(Index m) const
{
  if (max_iterations < 1) {
    throw config_error("em.max_iterations must be at least 1");
  }
  if (!(loglik_rel_tol > 0.0)) {
    throw config_error("em.tol must be positive");
  }
  if (r < 1) {
    throw config_error("em.r must be at least 1");
  }
  if (s < 1) {
    throw config_error("em.s must be at least 1");
  }
  if (m > 0 && r > m) {
    throw config_error("em.r must not exceed the number of channels (" +
                       std::to_string(m) + ")");
  }
  ga.validate();
}

Eigen::MatrixXd filtered_rows(const Eigen::MatrixXd& X, Index s)
{
  if (X.rows() < s) {
    throw config_error("need at least s rows of data");
  }
  return X.bottomRows(X.rows() - s + 1);
}

ModelParams init_params(const Eigen::MatrixXd& X, const EmConfig& cfg)
{
  const Index m = X.cols();
  const Index n = X.rows();
  cfg.validate(m);
  if (n < 3) {
    throw config_error("init: need at least 3 rows");
  }

  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd c0 =
    centered.transpose() * centered / static_cast<double>(n - 1);
  const Eigen::MatrixXd c1 = centered.bottomRows(n - 1).transpose() *
                             centered.topRows(n - 1) / static_cast<double>(n - 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (c1 + c1.transpose()));
  if (eig.info() != Eigen::Success) {
    throw numeric_error("init: eigendecomposition failed");
  }

  std::vector<Index> order(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    order[j] = j;
  }
  const Eigen::VectorXd lam = eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(lam(a)) > std::abs(lam(b));
  });

  ModelParams p;
  p.H.resize(m, cfg.r);
  for (Index i = 0; i < cfg.r; ++i) {
    Eigen::VectorXd v = eig.eigenvectors().col(order[i]);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) {
      v = -v;
    }
    p.H.col(i) = v * std::sqrt(std::max(v.dot(c0 * v), 0.0));
  }
  p.sigma2 = (c0.diagonal() - (p.H * p.H.transpose()).diagonal()).cwiseMax(1e-4);

  std::mt19937_64 rng(derive_seed({cfg.seed, 0x1u}));
  std::uniform_real_distribution<double> coef(-0.3, 0.3);
  p.beta.resize(cfg.s, cfg.r);
  for (Index i = 0; i < cfg.r; ++i) {
    Eigen::VectorXd b(cfg.s);
    do {
      for (Index j = 0; j < cfg.s; ++j) {
        b(j) = coef(rng);
      }
    } while (!is_stable(b));
    p.beta.col(i) = b;
  }
  set_unit_variance_noise(p);
  return p;
}

namespace {

struct EStepOutput
{
  SmoothedMoments moments;
  double log_likelihood = 0.0;
};

EStepOutput run_e_step(const ModelParams& params, const Eigen::MatrixXd& X)
{
  const AugmentedParams aug = augment(params);
  const FilterPass pass = forward_filter(aug, params.sigma2, filtered_rows(X, params.s()));
  EStepOutput out{backward_smooth(aug, pass.beliefs), pass.log_likelihood};
  out.moments.offset = params.s() - 1;
  return out;
}

} // namespace

SmoothedMoments e_step(const ModelParams& params, const Eigen::MatrixXd& X)
{
  return run_e_step(params, X).moments;
}

double log_likelihood(const ModelParams& params, const Eigen::MatrixXd& X)
{
  const AugmentedParams aug = augment(params);
  return forward_filter(aug, params.sigma2, filtered_rows(X, params.s())).log_likelihood;
}

Eigen::MatrixXd update_H(const SmoothedMoments& mo, const Eigen::MatrixXd& X)
{
  const Index r = mo.r;
  const Index m = X.cols();
  Eigen::MatrixXd xt = Eigen::MatrixXd::Zero(m, r);
  Eigen::MatrixXd tt = Eigen::MatrixXd::Zero(r, r);
  for (Index q = 0; q < mo.steps(); ++q) {
    const Eigen::VectorXd x = X.row(mo.offset + q).transpose();
    const Eigen::VectorXd t = mo.mean[q].head(r);
    xt += x * t.transpose();
    tt += mo.cov[q].topLeftCorner(r, r) + t * t.transpose();
  }
  tt = 0.5 * (tt + tt.transpose());

  Eigen::LLT<Eigen::MatrixXd> llt(tt);
  const double scale = tt.diagonal().cwiseAbs().maxCoeff();
  std::ostringstream collapsed;
  int count = 0;
  for (Index i = 0; i < r; ++i) {
    if (!(tt(i, i) > 1e-12 * std::max(scale, 1e-300))) {
      collapsed << (count++ ? ", " : "") << i;
    }
  }
  if (llt.info() != Eigen::Success || count > 0) {
    throw numeric_error("update_H: latent second-moment matrix is singular" +
                        (count > 0 ? "; collapsed latent dimensions: " + collapsed.str()
                                   : std::string()));
  }
  // H = xt tt⁻¹  ⇔  Hᵀ = tt⁻¹ xtᵀ
  return llt.solve(xt.transpose()).transpose();
}

Eigen::VectorXd update_sigma(const SmoothedMoments& mo, const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& H)
{
  const Index r = mo.r;
  const Index m = X.cols();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
  for (Index q = 0; q < mo.steps(); ++q) {
    const Eigen::VectorXd x = X.row(mo.offset + q).transpose();
    const Eigen::VectorXd t = mo.mean[q].head(r);
    const Eigen::MatrixXd tt = mo.cov[q].topLeftCorner(r, r) + t * t.transpose();
    const Eigen::VectorXd Ht = H * t;
    acc.array() += x.array().square() - 2.0 * Ht.array() * x.array() +
                   (H * tt).cwiseProduct(H).rowwise().sum().array();
  }
  return (acc / static_cast<double>(mo.steps())).cwiseMax(1e-8);
}

BetaObjective beta_objective(const SmoothedMoments& mo, Index i)
{
  const Index r = mo.r;
  const Index s = mo.s;
  if (mo.steps() < 2) {
    throw config_error("beta update needs at least two smoothed steps");
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(s + 1, s + 1);
  for (Index q = 1; q < mo.steps(); ++q) {
    const Eigen::MatrixXd now = mo.second_moment(q);
    const Eigen::MatrixXd before = mo.second_moment(q - 1);
    for (Index j = 0; j <= s; ++j) {
      for (Index l = 0; l <= s; ++l) {
        double v = 0.0;
        if (std::max(j, l) <= s - 1) {
          v = now(j * r + i, l * r + i);
        } else if (std::min(j, l) >= 1) {
          v = before((j - 1) * r + i, (l - 1) * r + i);
        } else if (j == 0) {
          v = mo.cross[q](i, (l - 1) * r + i); // E[t_k t_{k−s}]
        } else {
          v = mo.cross[q](i, (j - 1) * r + i);
        }
        M(j, l) += v;
      }
    }
  }
  const double n = static_cast<double>(mo.steps() - 1);
  BetaObjective obj;
  obj.moments = M / n;
  obj.moments = 0.5 * (obj.moments + obj.moments.transpose());
  obj.n = n;
  obj.gamma = obj.moments.row(0).tail(s).transpose().cwiseMax(-1.0).cwiseMin(1.0);
  return obj;
}

BetaUpdate update_beta(const SmoothedMoments& mo, const ModelParams& prev,
                       const EmConfig& cfg, int iteration)
{
  BetaUpdate out;
  out.beta = prev.beta;
  out.tau2.resize(prev.r());
  for (Index i = 0; i < prev.r(); ++i) {
    const BetaObjective obj = beta_objective(mo, i);
    GaConfig ga = cfg.ga;
    ga.seed = derive_seed({cfg.seed, cfg.ga.seed, static_cast<std::uint64_t>(iteration),
                           static_cast<std::uint64_t>(i)});
    const Eigen::VectorXd warm = prev.beta.col(i);
    const GaResult res = minimize(obj, ga, warm);
    if (!res.feasible) {
      out.warnings.push_back("iteration " + std::to_string(iteration) + ", latent " +
                             std::to_string(i) +
                             ": GA result violates the unit-variance constraint; "
                             "keeping previous coefficients");
    } else if (!is_stable(res.beta)) {
      out.warnings.push_back("iteration " + std::to_string(iteration) + ", latent " +
                             std::to_string(i) +
                             ": GA result is not a stable AR process; "
                             "keeping previous coefficients");
    } else {
      out.beta.col(i) = res.beta;
    }
    const Eigen::VectorXd b = out.beta.col(i);
    out.tau2(i) = std::clamp(innovation_variance(b, autocovariances(b)), 1e-8, 1.0);
  }
  return out;
}

namespace {

void check_fit_input(const Eigen::MatrixXd& X, const EmConfig& cfg)
{
  cfg.validate(X.cols());
  if (X.rows() <= 10 * cfg.s) {
    throw config_error("fit: need more than 10*s rows of data");
  }
  if (!X.allFinite()) {
    throw numeric_error("fit: data contains non-finite values");
  }
}

} // namespace

FitResult fit(const Eigen::MatrixXd& X, const EmConfig& cfg)
{
  check_fit_input(X, cfg);
  return fit(X, cfg, init_params(X, cfg));
}

FitResult fit(const Eigen::MatrixXd& X, const EmConfig& base, const ModelParams& start)
{
  EmConfig cfg = base;
  cfg.r = start.r();
  cfg.s = start.s();
  check_fit_input(X, cfg);
  if (start.m() != X.cols()) {
    throw config_error("fit: starting model expects " + std::to_string(start.m()) +
                       " channels, data has " + std::to_string(X.cols()));
  }
  validate(start);

  FitResult result;
  TrainingTrace& trace = result.trace;
  ModelParams params = start;
  ModelParams best = params;
  double best_ll = -std::numeric_limits<double>::infinity();

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const EStepOutput e = run_e_step(params, X);
      if (it == 1) {
        trace.initial_log_likelihood = e.log_likelihood;
        best_ll = e.log_likelihood;
      }

      ModelParams next = params;
      next.H = update_H(e.moments, X);
      next.sigma2 = update_sigma(e.moments, X, next.H);
      if (cfg.update_beta) {
        BetaUpdate bu = update_beta(e.moments, params, cfg, it);
        next.beta = std::move(bu.beta);
        next.tau2 = std::move(bu.tau2);
        trace.warnings.insert(trace.warnings.end(), bu.warnings.begin(),
                              bu.warnings.end());
      }
      const double ll = log_likelihood(next, X);
      if (!std::isfinite(ll)) {
        throw Error(ErrorCategory::convergence, "log-likelihood is not finite");
      }

      IterationRecord rec;
      rec.iteration = it;
      rec.log_likelihood = ll;
      rec.lemma_residual = lemma_residual(next);
      rec.beta = next.beta;
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      trace.iterations.push_back(rec);

      if (ll > best_ll) {
        best_ll = ll;
        best = next;
        trace.best_iteration = it;
      }
      const double change = std::abs(ll - e.log_likelihood) /
                            std::max(std::abs(e.log_likelihood), 1e-300);
      params = std::move(next);
      if (change < cfg.loglik_rel_tol) {
        trace.converged = true;
        break;
      }
    } catch (const Error& err) {
      throw Error(err.category(), "EM iteration " + std::to_string(it) + ": " + err.what());
    }
  }

  result.params = std::move(best);
  return result;
}

} // namespace ppfa
