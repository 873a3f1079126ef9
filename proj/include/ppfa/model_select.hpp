#pragma once

#include "ppfa/em_trainer.hpp"
#include "ppfa/monitoring.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ppfa {

/// TP / (TP + FN). Throws when both counts are zero.
double fdr(Index tp, Index fn);
/// FP / (FP + TN). Throws when both counts are zero.
double far(Index fp, Index tn);

/// Additive step deviations planted in the validation block. The fault
/// window [onset, end) is cut into one segment per magnitude; each segment
/// shifts one randomly chosen channel by magnitude × its training std.
struct InjectionSpec
{
  std::vector<double> magnitudes{1.0, 2.0, 4.0};
  double onset_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct SelectionGrid
{
  std::vector<Index> r_candidates{1, 2, 3};
  std::vector<Index> s_candidates{1, 2, 3};
  InjectionSpec injection;
  double split_fraction = 0.8;

  void validate() const;
};

struct ScoreRow
{
  Index r = 0;
  Index s = 0;
  double fdr = 0.0;
  double far = 0.0;
  double log_likelihood = 0.0;
  double train_seconds = 0.0;
};

struct SkippedPair
{
  Index r = 0;
  Index s = 0;
  std::string reason;
};

struct SelectionResult
{
  Index r = 0;
  Index s = 0;
  std::vector<ScoreRow> scoreboard;
  std::vector<SkippedPair> skipped;
};

struct InjectedData
{
  Eigen::MatrixXd data;
  std::vector<bool> faulty; // per row
};

/// Applies `spec` to `raw`, scaling by `channel_sd`.
InjectedData inject_deviations(const Eigen::MatrixXd& raw,
                               const Eigen::VectorXd& channel_sd,
                               const InjectionSpec& spec);

struct DetectionCounts
{
  Index tp = 0;
  Index fn = 0;
  Index fp = 0;
  Index tn = 0;
};

/// A row counts as detected when any of the three statistics alarms.
DetectionCounts count_detections(const MonitorReport& report,
                                 const std::vector<bool>& faulty);

/// True when `a` ranks ahead of `b`: larger FDR − FAR, then smaller r·s,
/// then smaller s.
bool better_pair(const ScoreRow& a, const ScoreRow& b);

/// Hold-out choice of (r, s): chronological split, fit per pair, score the
/// injected validation block. The EM `r`/`s` fields are overridden per pair.
SelectionResult select(const Eigen::MatrixXd& raw, const SelectionGrid& grid,
                       const EmConfig& em, double alpha);

} // namespace ppfa
