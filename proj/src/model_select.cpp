#include "ppfa/model_select.hpp"

#include "ppfa/error.hpp"
#include "ppfa/pipeline.hpp"
#include "ppfa/seeding.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace ppfa {

double fdr(Index tp, Index fn)
{
  if (tp < 0 || fn < 0 || tp + fn == 0) {
    throw config_error("FDR undefined: no faulty samples");
  }
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double far(Index fp, Index tn)
{
  if (fp < 0 || tn < 0 || fp + tn == 0) {
    throw config_error("FAR undefined: no normal samples");
  }
  return static_cast<double>(fp) / static_cast<double>(fp + tn);
}

void SelectionGrid::validate() const
{
  if (r_candidates.empty() || s_candidates.empty()) {
    throw config_error("select: candidate lists must be nonempty");
  }
  for (Index r : r_candidates) {
    if (r < 1) {
      throw config_error("select.r_candidates entries must be at least 1");
    }
  }
  for (Index s : s_candidates) {
    if (s < 1) {
      throw config_error("select.s_candidates entries must be at least 1");
    }
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw config_error("select.split_fraction must lie in (0, 1)");
  }
  if (!(injection.onset_fraction > 0.0 && injection.onset_fraction < 1.0)) {
    throw config_error("select.onset_fraction must lie in (0, 1)");
  }
  if (injection.magnitudes.empty()) {
    throw config_error("select.magnitudes must be nonempty");
  }
}

InjectedData inject_deviations(const Eigen::MatrixXd& raw,
                               const Eigen::VectorXd& channel_sd,
                               const InjectionSpec& spec)
{
  const Index n = raw.rows();
  const Index m = raw.cols();
  InjectedData out{raw, std::vector<bool>(static_cast<std::size_t>(n), false)};
  const Index onset = static_cast<Index>(std::floor(spec.onset_fraction * static_cast<double>(n)));
  const Index width = n - onset;
  const auto segments = static_cast<Index>(spec.magnitudes.size());
  if (width < segments) {
    throw config_error("injection: fault window shorter than the number of magnitudes");
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<Index> channel(0, m - 1);
  for (Index g = 0; g < segments; ++g) {
    const Index begin = onset + g * width / segments;
    const Index end = onset + (g + 1) * width / segments;
    const Index c = channel(rng);
    const double shift = spec.magnitudes[static_cast<std::size_t>(g)] * channel_sd(c);
    out.data.col(c).segment(begin, end - begin).array() += shift;
  }
  for (Index k = onset; k < n; ++k) {
    out.faulty[static_cast<std::size_t>(k)] = true;
  }
  return out;
}

DetectionCounts count_detections(const MonitorReport& report,
                                 const std::vector<bool>& faulty)
{
  if (report.rows.size() != faulty.size()) {
    throw config_error("count_detections: label count does not match report");
  }
  DetectionCounts c;
  for (std::size_t k = 0; k < faulty.size(); ++k) {
    const ReportRow& row = report.rows[k];
    const bool alarm = row.flag_t2 || row.flag_spe || row.flag_di;
    if (faulty[k]) {
      alarm ? ++c.tp : ++c.fn;
    } else {
      alarm ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

bool better_pair(const ScoreRow& a, const ScoreRow& b)
{
  const double sa = a.fdr - a.far;
  const double sb = b.fdr - b.far;
  if (sa != sb) {
    return sa > sb;
  }
  if (a.r * a.s != b.r * b.s) {
    return a.r * a.s < b.r * b.s;
  }
  return a.s < b.s;
}

SelectionResult select(const Eigen::MatrixXd& raw, const SelectionGrid& grid,
                       const EmConfig& em, double alpha)
{
  grid.validate();
  const Index n = raw.rows();
  const Index n_train = static_cast<Index>(std::floor(grid.split_fraction * static_cast<double>(n)));
  const Index n_valid = n - n_train;
  if (n_valid < 200) {
    throw config_error("select: validation block has " + std::to_string(n_valid) +
                       " rows; need at least 200");
  }
  const Eigen::MatrixXd train = raw.topRows(n_train);
  const Eigen::MatrixXd valid = raw.bottomRows(n_valid);

  const Eigen::RowVectorXd mean = train.colwise().mean();
  const Eigen::VectorXd sd =
    ((train.rowwise() - mean).array().square().colwise().sum() /
     static_cast<double>(n_train - 1)).sqrt().transpose();
  const InjectedData injected = inject_deviations(valid, sd, grid.injection);

  SelectionResult result;
  for (Index r : grid.r_candidates) {
    for (Index s : grid.s_candidates) {
      EmConfig cfg = em;
      cfg.r = r;
      cfg.s = s;
      const auto start = std::chrono::steady_clock::now();
      try {
        const TrainResult trained = train_model(train, cfg, alpha);
        const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const MonitorReport report = score_stream(trained.model, injected.data);
        const DetectionCounts c = count_detections(report, injected.faulty);
        result.scoreboard.push_back(
          {r, s, fdr(c.tp, c.fn), far(c.fp, c.tn), trained.log_likelihood, seconds});
      } catch (const Error& e) {
        result.skipped.push_back({r, s, e.what()});
      }
    }
  }
  if (result.scoreboard.empty()) {
    throw Error(ErrorCategory::convergence, "select: every (r, s) pair failed to train");
  }
  const ScoreRow* best = &result.scoreboard.front();
  for (const ScoreRow& row : result.scoreboard) {
    if (better_pair(row, *best)) {
      best = &row;
    }
  }
  result.r = best->r;
  result.s = best->s;
  return result;
}

} // namespace ppfa
