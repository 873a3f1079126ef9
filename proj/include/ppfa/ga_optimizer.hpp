#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace ppfa {

/// Real-coded genetic algorithm settings.
struct GaConfig
{
  int population_size = 60;
  int generations = 120;
  double crossover_rate = 0.8;  // blend (BLX-0.5) crossover probability
  double mutation_rate = 0.15;  // per-gene Gaussian mutation probability
  double mutation_scale = 0.1;
  double lambda_penalty = 1e3;  // weight of the unit-variance constraint penalty
  int elitism_count = 2;
  int tournament_size = 2;
  std::uint64_t seed = 0;
  double box_lo = -2.0;
  double box_hi = 2.0;

  /// Throws a config Error naming the first invalid field.
  void validate() const;
};

/// Sufficient statistics of the β stationarity conditions for one latent.
///
/// `moments(j, l)` is the time average over k of E[t_{k−j} t_{k−l}] for
/// 0 ≤ j, l ≤ s, and `gamma(j−1)` the current lag-j autocovariance estimate.
/// All sums are divided by the sample count `n`, which rescales the
/// objective by 1/n² without moving its roots.
struct BetaObjective
{
  Eigen::VectorXd gamma;
  Eigen::MatrixXd moments;
  double n = 0.0;

  Eigen::Index order() const { return gamma.size(); }
};

/// Per-lag left and right sides of the stationarity condition.
struct StationarityTerms
{
  Eigen::VectorXd lhs; // A_j
  Eigen::VectorXd rhs; // B_j
};

StationarityTerms stationarity_terms(const Eigen::VectorXd& beta,
                                     const BetaObjective& obj);

/// f(β) = Σ_j (A_j − B_j)².
double objective_f(const Eigen::VectorXd& beta, const BetaObjective& obj);

/// f plus the penalty −λ(1 − Σ β_j γ_j) when the constraint is violated.
double objective_g(const Eigen::VectorXd& beta, const BetaObjective& obj,
                   double lambda);

struct GaResult
{
  Eigen::VectorXd beta;
  double value = 0.0;
  bool feasible = true;              // 1 − Σ β γ ≥ −1e-6
  std::vector<double> best_history;  // best-so-far g after each generation
};

/// Minimises objective_g over the search box. `warm_start`, when given, is
/// clamped into the box and placed in the initial population.
GaResult minimize(const BetaObjective& obj, const GaConfig& cfg,
                  const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

} // namespace ppfa
