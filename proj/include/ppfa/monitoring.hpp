#pragma once

#include "ppfa/kalman.hpp"
#include "ppfa/preprocess.hpp"
#include "ppfa/statespace.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ppfa {

struct ControlLimits
{
  double alpha = 0.99;
  double psi_t2 = 0.0;
  double psi_spe = 0.0;
  double psi_di = 0.0;
  double bandwidth_t2 = 0.0;
  double bandwidth_spe = 0.0;
  double bandwidth_di = 0.0;
};

/// Covariance of the stacked-state first difference, kept positive definite.
struct DynamicsCovariance
{
  Eigen::MatrixXd D;
};

/// Everything needed to score raw measurements: the training whitening,
/// model parameters (in whitened units), D and the control limits.
struct PpfaModel
{
  WhiteningTransform whitening;
  ModelParams params;
  DynamicsCovariance dynamics;
  ControlLimits limits;
};

double t2_statistic(const Eigen::VectorXd& t_s);
double spe_statistic(const Eigen::VectorXd& innovation);
/// δᵀ D⁻¹ δ with δ = t_now − t_prev.
double di_statistic(const Eigen::VectorXd& t_now, const Eigen::VectorXd& t_prev,
                    const DynamicsCovariance& dyn);

/// Time average of E[δ δᵀ] over smoothed steps 1..T−1, symmetrised and
/// ridge-regularised when its smallest eigenvalue falls below 1e-10.
DynamicsCovariance estimate_D(const SmoothedMoments& moments);

/// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^{-1/5}.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian-kernel KDE distribution function at `x`.
double kde_cdf(std::span<const double> values, double bandwidth, double x);

struct KdeLimit
{
  double psi = 0.0;
  double bandwidth = 0.0;
};

/// ψ with KDE-CDF(ψ) = alpha, located to 1e-8. Needs at least 100 values.
KdeLimit kde_limit(std::span<const double> values, double alpha);

/// Per-sample statistics of a whitened series scored online from the prior.
/// di[0] is 0 (no previous state).
struct StatisticSeries
{
  std::vector<double> t2;
  std::vector<double> spe;
  std::vector<double> di;
};

StatisticSeries compute_statistics(const ModelParams& params,
                                   const DynamicsCovariance& dyn,
                                   const Eigen::MatrixXd& X_whitened);

/// KDE limits for the three statistics over the whitened training data.
/// The first DI value is excluded.
ControlLimits calibrate(const ModelParams& params, const DynamicsCovariance& dyn,
                        const Eigen::MatrixXd& X_whitened, double alpha);

enum class Verdict
{
  normal,
  dynamic_or_shift,
  correlation_break,
  both
};

const char* verdict_name(Verdict v);
Verdict verdict_from_flags(bool flag_t2, bool flag_spe, bool flag_di);

struct ReportRow
{
  Index index = 0;
  double t2 = 0.0;
  double spe = 0.0;
  double di = 0.0;
  bool flag_t2 = false;
  bool flag_spe = false;
  bool flag_di = false;
  Verdict verdict = Verdict::normal;
  bool burn_in = false;
};

struct MonitorReport
{
  std::vector<ReportRow> rows;

  Index alarms_t2() const;
  Index alarms_spe() const;
  Index alarms_di() const;
};

/// Online scorer. Carries the filter belief between calls, so feeding a
/// series in chunks gives the same rows as feeding it at once.
class StreamMonitor
{
public:
  explicit StreamMonitor(PpfaModel model);

  /// Scores one raw (unwhitened) sample.
  ReportRow push(const Eigen::VectorXd& raw);
  /// Scores each row of `raw` and appends to `report`.
  void push_rows(const Eigen::MatrixXd& raw, MonitorReport& report);

  Index processed() const { return count_; }
  const PpfaModel& model() const { return model_; }

private:
  PpfaModel model_;
  AugmentedParams aug_;
  std::optional<AugmentedBelief> belief_;
  Index count_ = 0;
};

MonitorReport score_stream(const PpfaModel& model, const Eigen::MatrixXd& raw);

} // namespace ppfa
