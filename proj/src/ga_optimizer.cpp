#include "ppfa/ga_optimizer.hpp"

#include "ppfa/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace ppfa {

void GaConfig::validate() const
{
  if (population_size < 2) {
    throw config_error("ga.population_size must be at least 2");
  }
  if (generations < 0) {
    throw config_error("ga.generations must be nonnegative");
  }
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw config_error("ga.crossover_rate must lie in [0, 1]");
  }
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
    throw config_error("ga.mutation_rate must lie in [0, 1]");
  }
  if (!(mutation_scale > 0.0)) {
    throw config_error("ga.mutation_scale must be positive");
  }
  if (!(lambda_penalty > 0.0)) {
    throw config_error("ga.lambda must be positive");
  }
  if (elitism_count < 0 || elitism_count >= population_size) {
    throw config_error("ga.elitism_count must lie in [0, population_size)");
  }
  if (tournament_size < 1) {
    throw config_error("ga.tournament_size must be at least 1");
  }
  if (!(box_lo < box_hi)) {
    throw config_error("ga.box_lo must be below ga.box_hi");
  }
}

StationarityTerms stationarity_terms(const Eigen::VectorXd& beta,
                                     const BetaObjective& obj)
{
  const Eigen::Index s = obj.order();
  const Eigen::MatrixXd& M = obj.moments;
  const double tau2 = 1.0 - beta.dot(obj.gamma);
  // Expected squared one-step residual Σ_k (t_k − Σ_l β_l t_{k−l})² / n.
  const Eigen::MatrixXd past = M.bottomRightCorner(s, s);
  const double residual = M(0, 0) - 2.0 * beta.dot(M.row(0).tail(s).transpose()) +
                          beta.dot(past * beta);

  StationarityTerms t;
  t.lhs.resize(s);
  t.rhs.resize(s);
  for (Eigen::Index j = 1; j <= s; ++j) {
    const double cross = past.row(j - 1).dot(beta);
    t.lhs(j - 1) = (obj.gamma(j - 1) - 2.0 * cross + 2.0 * M(0, j)) * tau2;
    t.rhs(j - 1) = obj.gamma(j - 1) * residual;
  }
  return t;
}

double objective_f(const Eigen::VectorXd& beta, const BetaObjective& obj)
{
  const StationarityTerms t = stationarity_terms(beta, obj);
  return (t.lhs - t.rhs).squaredNorm();
}

double objective_g(const Eigen::VectorXd& beta, const BetaObjective& obj,
                   double lambda)
{
  const double f = objective_f(beta, obj);
  const double slack = 1.0 - beta.dot(obj.gamma);
  return slack >= 0.0 ? f : f - lambda * slack;
}

GaResult minimize(const BetaObjective& obj, const GaConfig& cfg,
                  const std::optional<Eigen::VectorXd>& warm_start)
{
  cfg.validate();
  const Eigen::Index s = obj.order();
  const int pop = cfg.population_size;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> in_box(cfg.box_lo, cfg.box_hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, pop - 1);
  std::normal_distribution<double> normal(0.0, cfg.mutation_scale);

  auto clamp = [&](Eigen::VectorXd v) {
    return Eigen::VectorXd(v.cwiseMax(cfg.box_lo).cwiseMin(cfg.box_hi));
  };
  auto fitness = [&](const Eigen::VectorXd& b) {
    return objective_g(b, obj, cfg.lambda_penalty);
  };

  std::vector<Eigen::VectorXd> population(static_cast<std::size_t>(pop));
  for (int p = 0; p < pop; ++p) {
    Eigen::VectorXd ind(s);
    for (Eigen::Index g = 0; g < s; ++g) {
      ind(g) = in_box(rng);
    }
    population[p] = std::move(ind);
  }
  if (warm_start && warm_start->size() == s && warm_start->allFinite()) {
    population[0] = clamp(*warm_start);
  }

  std::vector<double> score(static_cast<std::size_t>(pop));
  auto evaluate = [&] {
    for (int p = 0; p < pop; ++p) {
      score[p] = fitness(population[p]);
    }
  };
  evaluate();

  std::vector<int> order(static_cast<std::size_t>(pop));
  auto rank = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score[a] < score[b]; });
  };
  rank();

  GaResult result;
  result.beta = population[order[0]];
  result.value = score[order[0]];

  auto tournament = [&]() -> const Eigen::VectorXd& {
    int best = pick(rng);
    for (int t = 1; t < cfg.tournament_size; ++t) {
      const int challenger = pick(rng);
      if (score[challenger] < score[best]) {
        best = challenger;
      }
    }
    return population[best];
  };

  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::vector<Eigen::VectorXd> next;
    next.reserve(population.size());
    for (int e = 0; e < cfg.elitism_count; ++e) {
      next.push_back(population[order[e]]);
    }
    while (static_cast<int>(next.size()) < pop) {
      const Eigen::VectorXd a = tournament();
      const Eigen::VectorXd b = tournament();
      Eigen::VectorXd child = a;
      if (unit(rng) < cfg.crossover_rate) {
        for (Eigen::Index g = 0; g < s; ++g) {
          const double u = -0.5 + 2.0 * unit(rng);
          child(g) = a(g) + u * (b(g) - a(g));
        }
      }
      for (Eigen::Index g = 0; g < s; ++g) {
        if (unit(rng) < cfg.mutation_rate) {
          child(g) += normal(rng);
        }
      }
      next.push_back(clamp(std::move(child)));
    }
    population = std::move(next);
    evaluate();
    rank();
    if (score[order[0]] < result.value) {
      result.value = score[order[0]];
      result.beta = population[order[0]];
    }
    result.best_history.push_back(result.value);
  }

  result.feasible = 1.0 - result.beta.dot(obj.gamma) >= -1e-6;
  return result;
}

} // namespace ppfa
