#include "ppfa/monitoring.hpp"

#include "ppfa/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace ppfa {

double t2_statistic(const Eigen::VectorXd& t_s)
{
  return t_s.squaredNorm();
}

double spe_statistic(const Eigen::VectorXd& innovation)
{
  return innovation.squaredNorm();
}

double di_statistic(const Eigen::VectorXd& t_now, const Eigen::VectorXd& t_prev,
                    const DynamicsCovariance& dyn)
{
  const Eigen::VectorXd delta = t_now - t_prev;
  const double di = delta.dot(dyn.D.ldlt().solve(delta));
  return std::max(di, 0.0);
}

DynamicsCovariance estimate_D(const SmoothedMoments& mo)
{
  const Index n = mo.r * mo.s;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  if (mo.steps() < 2) {
    throw config_error("estimate_D: need at least two smoothed steps");
  }
  for (Index q = 1; q < mo.steps(); ++q) {
    D += mo.second_moment(q) - mo.cross[q] - mo.cross[q].transpose() +
         mo.second_moment(q - 1);
  }
  D /= static_cast<double>(mo.steps() - 1);
  D = 0.5 * (D + D.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(D, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  constexpr double kFloor = 1e-10;
  if (min_eig < kFloor) {
    const double ridge = std::max(1e-8 * D.trace() / static_cast<double>(n), kFloor);
    D.diagonal().array() += ridge - std::min(min_eig, 0.0);
  }
  return {D};
}

double silverman_bandwidth(std::span<const double> values)
{
  const auto n = static_cast<double>(values.size());
  if (values.size() < 2) {
    throw config_error("bandwidth: need at least two values");
  }
  double mean = 0.0;
  for (double v : values) {
    mean += v;
  }
  mean /= n;
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / (n - 1.0));

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double pos = p * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - std::floor(pos)) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);

  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) {
    spread = sd;
  }
  return 0.9 * spread * std::pow(n, -0.2);
}

double kde_cdf(std::span<const double> values, double bandwidth, double x)
{
  double acc = 0.0;
  for (double v : values) {
    acc += 0.5 * std::erfc(-(x - v) / (bandwidth * std::numbers::sqrt2));
  }
  return acc / static_cast<double>(values.size());
}

KdeLimit kde_limit(std::span<const double> values, double alpha)
{
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw config_error("alpha must lie in (0, 1)");
  }
  if (values.size() < 100) {
    throw config_error("control limit: need at least 100 values, got " +
                       std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw numeric_error("control limit: non-finite statistic value");
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  if (*lo_it == *hi_it) {
    throw numeric_error("control limit: all values identical (zero bandwidth)");
  }
  const double h = silverman_bandwidth(values);

  auto residual = [&](double x) { return kde_cdf(values, h, x) - alpha; };
  double a = *lo_it - 10.0 * h;
  double b = *hi_it + 10.0 * h;
  // Widen in the (rare) case the tails still hold more mass than 1 − alpha.
  while (residual(a) > 0.0) {
    a -= 10.0 * h;
  }
  while (residual(b) < 0.0) {
    b += 10.0 * h;
  }
  std::uintmax_t max_iter = 200;
  const auto bracket = boost::math::tools::toms748_solve(
    residual, a, b, [](double l, double u) { return std::abs(u - l) <= 1e-8; },
    max_iter);
  return {0.5 * (bracket.first + bracket.second), h};
}

namespace {

struct StepStatistics
{
  FilterStep step;
  double t2 = 0.0;
  double spe = 0.0;
  double di = 0.0;
};

StepStatistics score_step(const AugmentedParams& aug, const ModelParams& params,
                          const DynamicsCovariance& dyn,
                          const std::optional<AugmentedBelief>& prev,
                          const Eigen::VectorXd& x)
{
  StepStatistics out{filter_step(aug, params.sigma2, prev, x)};
  out.t2 = t2_statistic(out.step.belief.mu);
  out.spe = spe_statistic(out.step.innovation);
  out.di = prev ? di_statistic(out.step.belief.mu, prev->mu, dyn) : 0.0;
  return out;
}

} // namespace

StatisticSeries compute_statistics(const ModelParams& params,
                                   const DynamicsCovariance& dyn,
                                   const Eigen::MatrixXd& X)
{
  const AugmentedParams aug = augment(params);
  StatisticSeries out;
  const auto n = static_cast<std::size_t>(X.rows());
  out.t2.reserve(n);
  out.spe.reserve(n);
  out.di.reserve(n);
  std::optional<AugmentedBelief> belief;
  for (Index k = 0; k < X.rows(); ++k) {
    StepStatistics st = score_step(aug, params, dyn, belief, X.row(k).transpose());
    out.t2.push_back(st.t2);
    out.spe.push_back(st.spe);
    out.di.push_back(st.di);
    belief = std::move(st.step.belief);
  }
  return out;
}

ControlLimits calibrate(const ModelParams& params, const DynamicsCovariance& dyn,
                        const Eigen::MatrixXd& X, double alpha)
{
  const StatisticSeries series = compute_statistics(params, dyn, X);
  ControlLimits lim;
  lim.alpha = alpha;
  const KdeLimit t2 = kde_limit(series.t2, alpha);
  const KdeLimit spe = kde_limit(series.spe, alpha);
  const KdeLimit di = kde_limit(std::span<const double>(series.di).subspan(1), alpha);
  lim.psi_t2 = t2.psi;
  lim.psi_spe = spe.psi;
  lim.psi_di = di.psi;
  lim.bandwidth_t2 = t2.bandwidth;
  lim.bandwidth_spe = spe.bandwidth;
  lim.bandwidth_di = di.bandwidth;
  return lim;
}

const char* verdict_name(Verdict v)
{
  switch (v) {
    case Verdict::normal: return "normal";
    case Verdict::dynamic_or_shift: return "dynamic-or-shift";
    case Verdict::correlation_break: return "correlation-break";
    case Verdict::both: return "both";
  }
  return "unknown";
}

Verdict verdict_from_flags(bool flag_t2, bool flag_spe, bool flag_di)
{
  const bool dynamic = flag_t2 || flag_di;
  if (dynamic && flag_spe) {
    return Verdict::both;
  }
  if (dynamic) {
    return Verdict::dynamic_or_shift;
  }
  return flag_spe ? Verdict::correlation_break : Verdict::normal;
}

Index MonitorReport::alarms_t2() const
{
  return std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return r.flag_t2; });
}

Index MonitorReport::alarms_spe() const
{
  return std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return r.flag_spe; });
}

Index MonitorReport::alarms_di() const
{
  return std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return r.flag_di; });
}

StreamMonitor::StreamMonitor(PpfaModel model)
  : model_(std::move(model))
  , aug_(augment(model_.params))
{}

ReportRow StreamMonitor::push(const Eigen::VectorXd& raw)
{
  if (raw.size() != model_.params.m()) {
    throw config_error("score: expected " + std::to_string(model_.params.m()) +
                       " channels, got " + std::to_string(raw.size()));
  }
  const Eigen::VectorXd x = model_.whitening.apply(raw);
  StepStatistics st = score_step(aug_, model_.params, model_.dynamics, belief_, x);

  ReportRow row;
  row.index = count_;
  row.t2 = st.t2;
  row.spe = st.spe;
  row.di = st.di;
  row.flag_t2 = row.t2 > model_.limits.psi_t2;
  row.flag_spe = row.spe > model_.limits.psi_spe;
  row.flag_di = row.di > model_.limits.psi_di;
  row.verdict = verdict_from_flags(row.flag_t2, row.flag_spe, row.flag_di);
  row.burn_in = count_ < model_.params.s();

  belief_ = std::move(st.step.belief);
  ++count_;
  return row;
}

void StreamMonitor::push_rows(const Eigen::MatrixXd& raw, MonitorReport& report)
{
  if (raw.cols() != model_.params.m()) {
    throw config_error("score: expected " + std::to_string(model_.params.m()) +
                       " channels, got " + std::to_string(raw.cols()));
  }
  for (Index k = 0; k < raw.rows(); ++k) {
    report.rows.push_back(push(raw.row(k).transpose()));
  }
}

MonitorReport score_stream(const PpfaModel& model, const Eigen::MatrixXd& raw)
{
  StreamMonitor monitor(model);
  MonitorReport report;
  monitor.push_rows(raw, report);
  return report;
}

} // namespace ppfa
